#include "helpers.hpp"

#include "kstab/kmeans.hpp"
#include "kstab/perturb.hpp"
#include "kstab/stability.hpp"

#include <doctest.h>

#include <cmath>

using namespace kstab;
using testing::line;

namespace {

/// Replicates on a shared root whose labelings are given directly.
std::vector<Replicate> on_shared_points(const std::vector<Labels>& labelings, int k) {
    const DataSet d = make_dataset(Matrix::Zero(static_cast<Index>(labelings[0].size()), 1), std::nullopt, "shared");
    std::vector<Replicate> out;
    for (const auto& l : labelings) {
        out.push_back({d, make_clustering(d, l, k)});
    }
    return out;
}

} // namespace

TEST_CASE("all-pairs estimator keeps the zero diagonal") {
    const auto same = on_shared_points({{0, 0, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}}, 2);
    CHECK(estimate_instability_all_pairs(same, DistanceKind::minimal_matching, Comparison::overlap_restrict).mean == 0.0);

    // d(C1, C2) = 0.4 on ten points
    const auto two = on_shared_points({{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, {0, 0, 0, 1, 1, 0, 0, 1, 1, 1}}, 2);
    const auto e2 = estimate_instability_all_pairs(two, DistanceKind::minimal_matching, Comparison::overlap_restrict);
    CHECK(e2.mean == doctest::Approx(0.2));
    CHECK(e2.distances.size() == 4);

    // Hamming off-diagonal distances 0.1, 0.2, 0.3 on ten points
    const auto three = on_shared_points(
        {{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 0, 0, 0, 0, 0, 0, 0}}, 2);
    const auto e3 = estimate_instability_all_pairs(three, DistanceKind::hamming, Comparison::overlap_restrict);
    CHECK(e3.mean == doctest::Approx(2 * 0.6 / 9));
    double sum = 0;
    for (double x : e3.distances) {
        sum += x;
    }
    CHECK(std::abs(e3.mean - sum / e3.distances.size()) < 1e-12);
}

TEST_CASE("center extension compares on the union of points") {
    const DataSet a = make_dataset(line({0, 1, 10}), std::nullopt, "a");
    const DataSet b = make_dataset(line({2, 11, 12}), std::nullopt, "b");
    const Replicate ra{a, make_clustering(a, {0, 0, 1}, 2, line({0.5, 10}))};
    const Replicate rb{b, make_clustering(b, {1, 0, 0}, 2, line({11.5, 2}))};
    CHECK(compare(ra, rb, DistanceKind::minimal_matching, Comparison::center_extend) == 0.0);
    const Replicate shifted{b, make_clustering(b, {0, 1, 1}, 2, line({2, 11.5}))};
    CHECK(common_domain(ra, shifted, Comparison::center_extend).size() == 6);
    Replicate bare = ra;
    bare.clustering.centers.reset();
    CHECK_THROWS_AS(compare(bare, rb, DistanceKind::minimal_matching, Comparison::center_extend), InvalidArgument);
}

TEST_CASE("disjoint-pairs estimator") {
    const Sampler same = [](Index n, const Seed&) {
        Matrix p(n, 1);
        for (Index i = 0; i < n; ++i) {
            p(i, 0) = i < n / 2 ? -10.0 + 0.01 * i : 10.0 + 0.01 * i;
        }
        return make_dataset(p);
    };
    const ClusterFn ideal = [](const DataSet& d, int k, const Seed& s) { return idealized_kmeans(d, k, 10, s).clustering; };
    const auto e0 = estimate_instability_disjoint_pairs(same, ideal, 2, 40, 3, Seed{1, {}});
    CHECK(e0.mean == 0.0);
    CHECK(e0.num_pairs == 3);
    CHECK(estimate_instability_disjoint_pairs(same, ideal, 2, 40, 1, Seed{1, {}}).distances.size() == 1);
    CHECK_THROWS_AS(estimate_instability_disjoint_pairs(same, ideal, 50, 40, 1, Seed{1, {}}), InvalidArgument);

    const Sampler two_points = [](Index n, const Seed& s) {
        Rng rng = make_rng(s);
        std::normal_distribution<double> g(0.0, 1.0);
        std::bernoulli_distribution side(0.5);
        Matrix p(n, 1);
        for (Index i = 0; i < n; ++i) {
            p(i, 0) = (side(rng) ? 10.0 : -10.0) + g(rng);
        }
        return make_dataset(p, std::nullopt, tagged_id("pm10", s));
    };
    const auto e = estimate_instability_disjoint_pairs(two_points, ideal, 2, 200, 20, Seed{2, {}});
    CHECK(e.mean < 0.02);
    CHECK(rescale(e) == doctest::Approx(std::sqrt(200.0) * e.mean));
}

TEST_CASE("area under the CDF") {
    CHECK(area_under_cdf_score(std::vector<double>{0, 0}) == 1.0);
    CHECK(area_under_cdf_score(std::vector<double>{1, 1}) == 0.0);
    CHECK(area_under_cdf_score(std::vector<double>{0.2, 0.4}) == doctest::Approx(0.7));
    CHECK_THROWS_AS(area_under_cdf_score(std::vector<double>{1.5}), InvalidArgument);
}

TEST_CASE("permutation null") {
    const auto single = on_shared_points({{0, 0, 0, 0}, {0, 0, 0, 0}}, 1);
    CHECK(permutation_null(single, DistanceKind::minimal_matching, Comparison::overlap_restrict, Seed{1, {}}).mean == 0.0);

    const int n = 2000;
    Labels balanced(n);
    for (int i = 0; i < n; ++i) {
        balanced[i] = i % 2;
    }
    const auto reps = on_shared_points({balanced, balanced, balanced, balanced}, 2);
    const auto p1 = permutation_null(reps, DistanceKind::minimal_matching, Comparison::overlap_restrict, Seed{3, {}});
    const auto p2 = permutation_null(reps, DistanceKind::minimal_matching, Comparison::overlap_restrict, Seed{3, {}});
    CHECK(p1.mean == p2.mean);
    // off-diagonal pairs sit just under 0.5; the zero diagonal takes a quarter of the mass
    double off = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (i != j) {
                off += p1.distances[i * 4 + j] / 12;
            }
        }
    }
    CHECK(off == doctest::Approx(0.5).epsilon(0.05));
    CHECK(off < 0.5);
}

TEST_CASE("rescale") {
    InstabilityEstimate e;
    e.n = 100;
    e.mean = 0.0;
    CHECK(rescale(e) == 0.0);
    e.mean = 0.03;
    CHECK(rescale(e) == doctest::Approx(0.3));
}

TEST_CASE("curves and argmin selection") {
    StabilityCurve raw, null;
    for (int k = 2; k <= 5; ++k) {
        raw.rows.push_back({k, 0.1 * k, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
        null.rows.push_back({k, 0.1 * k, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
    }
    for (const auto& row : normalize_curve(raw, null).rows) {
        CHECK(*row.normalized == doctest::Approx(1.0));
    }
    raw.rows[2].raw = 0.01;
    null.rows[2].raw = 0.1;
    CHECK(*normalize_curve(raw, null).rows[2].normalized == doctest::Approx(0.1));
    null.rows[1].raw = 0.0;
    CHECK_THROWS_AS(normalize_curve(raw, null), InvalidArgument);

    StabilityCurve c;
    const double values[] = {1.0, 0.4, 0.1, 0.8};
    for (int k = 2; k <= 5; ++k) {
        c.rows.push_back({k, 0.5, std::nullopt, values[k - 2], std::nullopt, std::nullopt});
    }
    CHECK(select_k_argmin(c, true) == 4);
    CHECK(select_k_argmin(c, false) == 2);
    c.rows[1].normalized = 0.05;
    c.rows[3].normalized = 0.05;
    CHECK(select_k_argmin(c, true) == 3);
    StabilityCurve single;
    single.rows.push_back({7, 0.3, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
    CHECK(select_k_argmin(single, false) == 7);
    CHECK_THROWS_AS(select_k_argmin(StabilityCurve{}, false), InvalidArgument);

    StabilityCurve unordered = single;
    unordered.rows.push_back({3, 0.2, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
    CHECK_THROWS_AS(validate(unordered), InvalidArgument);
}

TEST_CASE("significance selection") {
    const std::vector<int> ks{2, 3};
    const std::vector<std::vector<double>> raw{std::vector<double>(50, 0.0), std::vector<double>(50, 0.5)};
    std::vector<double> noisy;
    for (int i = 0; i < 50; ++i) {
        noisy.push_back(0.45 + 0.002 * i);
    }
    const std::vector<std::vector<double>> null{noisy, noisy};
    const auto r = select_k_significance(ks, raw, null, 0.05, Seed{1, {}});
    CHECK(r.p_values[0] == doctest::Approx(1.0 / 1001));
    CHECK(r.selected_k == 2);

    const std::vector<std::vector<double>> same{noisy, noisy};
    const auto s = select_k_significance(ks, same, same, 0.05, Seed{1, {}});
    CHECK(s.p_values[0] == doctest::Approx(0.5).epsilon(0.15));
    CHECK_FALSE(s.selected_k.has_value());
    CHECK_THROWS_AS(select_k_significance(ks, raw, null, 1.5, Seed{1, {}}), InvalidArgument);
}

TEST_CASE("tube mass") {
    const Matrix centers = line({-1, 1});
    const DataSet pts = make_dataset(line({-0.5, 0.05, 0.5}));
    CHECK(tube_mass(centers, pts, 0.1) == doctest::Approx(1.0 / 3.0));
    CHECK(tube_mass(centers, pts, 0.0) == 0.0);
    CHECK(tube_mass(centers, pts, 100.0) == 1.0);
    CHECK(boundary_distance(line({0.05}).row(0), centers) == doctest::Approx(0.05));
    CHECK_THROWS_AS(tube_mass(line({1, 1}), pts, 0.1), InvalidArgument);

    Rng rng = make_rng(Seed{4, {}});
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix p(500, 2), c(3, 2);
    for (Index i = 0; i < p.rows(); ++i) {
        p(i, 0) = g(rng);
        p(i, 1) = g(rng);
    }
    c << -1, 0, 1, 0, 0, 1.5;
    const DataSet cloud = make_dataset(p);
    double previous = 0;
    for (double gamma : {0.0, 0.1, 0.3, 0.7, 1.5}) {
        const double t = tube_mass(c, cloud, gamma);
        CHECK(t >= previous);
        previous = t;
    }
}

TEST_CASE("estimates ignore relabeling") {
    Rng rng = make_rng(Seed{12, {}});
    std::vector<Labels> ls;
    for (int b = 0; b < 5; ++b) {
        ls.push_back(testing::random_labels(rng, 30, 3));
    }
    const auto base = on_shared_points(ls, 3);
    for (auto& l : ls) {
        for (auto& x : l) {
            x = (x + 1) % 3;
        }
    }
    const auto relabeled = on_shared_points(ls, 3);
    for (auto kind : {DistanceKind::minimal_matching, DistanceKind::rand, DistanceKind::variation_of_information}) {
        CHECK(estimate_instability_all_pairs(base, kind, Comparison::overlap_restrict).mean ==
              doctest::Approx(estimate_instability_all_pairs(relabeled, kind, Comparison::overlap_restrict).mean));
    }
}

TEST_CASE("all-pairs and disjoint-pairs estimators agree on one source") {
    const Sampler source = [](Index n, const Seed& s) {
        Rng rng = make_rng(s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix p(n, 2);
        for (Index i = 0; i < n; ++i) {
            p(i, 0) = u(rng);
            p(i, 1) = u(rng);
        }
        return make_dataset(p, std::nullopt, tagged_id("square", s));
    };
    const ClusterFn algo = [](const DataSet& d, int k, const Seed& s) { return idealized_kmeans(d, k, 5, s).clustering; };
    const int m = 20;
    const auto dis = estimate_instability_disjoint_pairs(source, algo, 3, 200, m, Seed{5, {}});
    std::vector<Replicate> reps;
    for (int b = 0; b < 2 * m; ++b) {
        const Seed s = Seed{6, {}}.child(static_cast<std::uint64_t>(b));
        DataSet d = source(200, s);
        Clustering c = algo(d, 3, s.child(1));
        reps.push_back({std::move(d), std::move(c)});
    }
    const auto all = estimate_instability_all_pairs(reps, DistanceKind::minimal_matching, Comparison::center_extend);
    const double b = 2.0 * m;
    const double off_diagonal_mean = all.mean * b / (b - 1);
    const double se = std::hypot(dis.stdev / std::sqrt(static_cast<double>(m)), all.stdev / std::sqrt(b));
    CHECK(std::abs(off_diagonal_mean - dis.mean) <= 3 * se);
}
