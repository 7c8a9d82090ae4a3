#include "helpers.hpp"

#include "kstab/kmeans.hpp"
#include "kstab/synthgen.hpp"

#include <doctest.h>

using namespace kstab;
using testing::line;

TEST_CASE("eval_objective") {
    Matrix p(1, 2);
    p << 3, 4;
    CHECK(eval_objective(make_dataset(p), Matrix::Zero(1, 2)) == 25.0);
    const DataSet d = make_dataset(line({0, 2, 5}));
    CHECK(eval_objective(d, d.points()) == 0.0);
    CHECK(eval_objective(make_dataset(line({0, 2})), line({1})) == 1.0);
}

TEST_CASE("assign_labels") {
    CHECK(assign_labels(line({1}), line({0, 2})) == Labels{0});
    CHECK(assign_labels(line({0, 2, 5}), line({0, 2, 5})) == Labels{0, 1, 2});
    CHECK(assign_labels(line({0, 10}), line({1, 9})) == Labels{0, 1});
}

TEST_CASE("lloyd_step") {
    const DataSet d = make_dataset(line({0, 2}));
    CHECK(lloyd_step(d, line({5})).centers(0, 0) == 1.0);
    Vector w(2);
    w << 3, 1;
    CHECK(lloyd_step(make_dataset(line({0, 2}), w), line({7})).centers(0, 0) == 0.5);
    const DataSet two = make_dataset(line({0, 1, 10, 11}));
    CHECK(lloyd_step(two, line({0.5, 10.5})).centers == line({0.5, 10.5}));
    // a center with no points stays put
    CHECK(lloyd_step(two, line({0.5, 10.5, 100})).centers(2, 0) == 100.0);
}

TEST_CASE("run_lloyd") {
    const DataSet d = make_dataset(line({0, 1, 10, 11}));
    const KMeansResult at_opt = run_lloyd(d, line({0.5, 10.5}));
    CHECK(at_opt.iterations == 1);
    CHECK(at_opt.converged);

    const KMeansResult r = run_lloyd(d, line({0, 11}));
    CHECK(r.centers() == line({0.5, 10.5}));
    CHECK(r.objective == doctest::Approx(0.25));
    CHECK(r.clustering.labels == Labels{0, 0, 1, 1});

    const KMeansResult capped = run_lloyd(d, line({-50, 60}), {1, 1e-8});
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 1);
}

TEST_CASE("lloyd invariants on random data") {
    Rng rng = make_rng(Seed{5, {}});
    std::normal_distribution<double> g(0.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        const Index n = 30 + t;
        const int k = 2 + t % 4;
        Matrix p(n, 2);
        for (Index i = 0; i < n; ++i) {
            p(i, 0) = g(rng);
            p(i, 1) = g(rng);
        }
        const DataSet d = make_dataset(p);
        const Matrix init = init_uniform_points(d, k, Seed{static_cast<std::uint64_t>(t), {}});
        const KMeansResult r = run_lloyd(d, init);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
        }
        CHECK(r.objective == doctest::Approx(eval_objective(d, r.centers())).epsilon(1e-9));
        CHECK(assign_labels(d.points(), r.centers()) == r.clustering.labels);

        // translation and scaling
        Eigen::RowVector2d shift(3.0, -7.0);
        const double s = 2.5;
        const KMeansResult moved = run_lloyd(make_dataset((p.rowwise() + shift).eval()), (init.rowwise() + shift).eval());
        CHECK((moved.centers() - (r.centers().rowwise() + shift)).cwiseAbs().maxCoeff() < 1e-9);
        const KMeansResult scaled = run_lloyd(make_dataset((p * s).eval()), (init * s).eval());
        CHECK((scaled.centers() - r.centers() * s).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(scaled.objective == doctest::Approx(r.objective * s * s));
        CHECK(scaled.clustering.labels == r.clustering.labels);
    }
}

TEST_CASE("init_uniform_points") {
    const DataSet d = make_dataset(line({3, 1, 2}));
    Matrix all = init_uniform_points(d, 3, Seed{1, {}});
    std::vector<double> v(all.data(), all.data() + 3);
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<double>{1, 2, 3});
    CHECK(init_uniform_points(d, 1, Seed{1, {}}).rows() == 1);
    CHECK(init_uniform_points(d, 2, Seed{9, {}}) == init_uniform_points(d, 2, Seed{9, {}}));
    CHECK_THROWS_AS(init_uniform_points(make_dataset(line({1, 1, 1})), 2, Seed{1, {}}), InvalidArgument);
}

TEST_CASE("init_scheme_i") {
    const DataSet d = make_dataset(line({0, 1, 2}));
    CHECK(init_scheme_i(d, 1, Seed{1, {}}).rows() == 1);

    const Generator two = preset("thm4_two_gauss_1d").generator;
    const Matrix means2 = std::get<MixtureSpec>(two).means();
    int good = 0;
    for (int r = 0; r < 200; ++r) {
        const Seed s{1234, {static_cast<std::uint64_t>(r)}};
        const DataSet data = sample(two, 500, s.child(0)).data;
        const auto rep = report_configuration(init_scheme_i(data, 2, s.child(1), {6, std::nullopt}), means2, 2.0);
        good += rep.counts == std::vector<int>{1, 1};
    }
    // all six preliminary draws land in one Gaussian with probability 1/32
    CHECK(good >= 185);

    MixtureSpec three;
    three.dim = 1;
    for (double m : {0.0, 20.0, 40.0}) {
        three.components.push_back({Vector::Constant(1, m), 1.0, 1.0 / 3.0});
    }
    int covered = 0;
    for (int r = 0; r < 200; ++r) {
        const Seed s{99, {static_cast<std::uint64_t>(r)}};
        const DataSet data = sample_mixture(three, 500, s.child(0)).data;
        covered += report_configuration(init_scheme_i(data, 4, s.child(1), {12, std::nullopt}), three.means(), 2.0).covered;
    }
    CHECK(covered >= 185);
}

TEST_CASE("idealized_kmeans") {
    const DataSet d = make_dataset(line({0, 1, 10, 11}));
    const KMeansResult r = idealized_kmeans(d, 2, 20, Seed{3, {}});
    Matrix c = r.centers();
    std::sort(c.data(), c.data() + 2);
    CHECK(c == line({0.5, 10.5}));
    CHECK(r.objective == doctest::Approx(0.25));

    Rng rng = make_rng(Seed{8, {}});
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix p(200, 2);
    for (Index i = 0; i < p.rows(); ++i) {
        p(i, 0) = g(rng);
        p(i, 1) = g(rng);
    }
    const DataSet cloud = make_dataset(p);
    const Seed s{17, {}};
    const KMeansResult one = idealized_kmeans(cloud, 5, 1, s);
    const KMeansResult real = realistic_kmeans(cloud, 5, InitMethod::uniform, s.child(0));
    CHECK(one.centers() == real.centers());
    double previous = INFINITY;
    for (int restarts : {1, 2, 5, 10, 20}) {
        const double obj = idealized_kmeans(cloud, 5, restarts, s).objective;
        CHECK(obj <= previous);
        previous = obj;
    }
}

TEST_CASE("report_configuration") {
    const Matrix means = line({0, 20});
    const auto exact = report_configuration(means, means, 2.0);
    CHECK(exact.counts == std::vector<int>{1, 1});
    CHECK(exact.covered);
    const auto left = report_configuration(line({0.1, -0.5, 1.0}), means, 2.0);
    CHECK(left.counts == std::vector<int>{3, 0});
    CHECK_FALSE(left.covered);
    const auto stray = report_configuration(line({10}), means, 2.0);
    CHECK_FALSE(stray.region_assignments[0].has_value());
    CHECK_THROWS_AS(report_configuration(means, means, 10.0), InvalidArgument);
}
