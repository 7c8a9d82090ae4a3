#include "kstab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kstab {

namespace {

void check_centers(const DataSet& data, const Matrix& centers) {
    if (centers.rows() < 1) {
        throw InvalidArgument("need at least one center");
    }
    if (centers.cols() != data.dim()) {
        throw InvalidArgument("centers have dimension " + std::to_string(centers.cols()) + ", data has " +
                              std::to_string(data.dim()));
    }
}

double max_displacement(const Matrix& a, const Matrix& b) {
    return (a - b).rowwise().norm().maxCoeff();
}

} // namespace

double eval_objective(const DataSet& data, const Matrix& centers) {
    check_centers(data, centers);
    const Vector nearest = nearest_squared_distances(data.points(), centers);
    return data.weights().dot(nearest) / data.total_weight();
}

LloydStep lloyd_step(const DataSet& data, const Matrix& centers) {
    check_centers(data, centers);
    const Matrix& pts = data.points();
    const Vector& w = data.weights();
    const Index k = centers.rows();

    LloydStep out;
    out.labels.resize(data.size());
    Matrix sums = Matrix::Zero(k, data.dim());
    Vector mass = Vector::Zero(k);
    double loss = 0;
    for (Index i = 0; i < data.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Index c = 0; c < k; ++c) {
            const double dist = (pts.row(i) - centers.row(c)).squaredNorm();
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        out.labels[i] = arg;
        sums.row(arg) += w[i] * pts.row(i);
        mass[arg] += w[i];
        loss += w[i] * best;
    }
    out.objective = loss / data.total_weight();

    out.centers = centers;
    for (Index c = 0; c < k; ++c) {
        if (mass[c] > 0) {
            out.centers.row(c) = sums.row(c) / mass[c];
        }
    }
    return out;
}

KMeansResult run_lloyd(const DataSet& data, const Matrix& init_centers, const LloydOptions& options) {
    check_centers(data, init_centers);
    if (options.max_iter < 1) {
        throw InvalidArgument("max_iter must be at least 1");
    }
    if (!(options.tol >= 0)) {
        throw InvalidArgument("tol must be non-negative");
    }

    KMeansResult out;
    out.init_centers = init_centers;
    Matrix centers = init_centers;
    for (int it = 1; it <= options.max_iter; ++it) {
        LloydStep step = lloyd_step(data, centers);
        out.objective_trace.push_back(step.objective);
        const double moved = max_displacement(step.centers, centers);
        centers = std::move(step.centers);
        out.iterations = it;
        if (moved <= options.tol) {
            out.converged = true;
            break;
        }
    }

    // Final labels and objective belong to the final centers.
    LloydStep last = lloyd_step(data, centers);
    out.objective = last.objective;
    out.objective_trace.push_back(last.objective);
    out.clustering = make_clustering(data, std::move(last.labels), static_cast<int>(centers.rows()), centers);
    return out;
}

Index count_distinct_points(const Matrix& points) {
    std::vector<Index> order(points.rows());
    std::iota(order.begin(), order.end(), Index{0});
    auto row_less = [&](Index a, Index b) {
        for (Index j = 0; j < points.cols(); ++j) {
            if (points(a, j) != points(b, j)) {
                return points(a, j) < points(b, j);
            }
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    Index distinct = order.empty() ? 0 : 1;
    for (std::size_t r = 1; r < order.size(); ++r) {
        if (row_less(order[r - 1], order[r])) {
            ++distinct;
        }
    }
    return distinct;
}

Matrix init_uniform_points(const DataSet& data, int k, const Seed& seed) {
    if (k < 1) {
        throw InvalidArgument("need k >= 1 initial centers");
    }
    const Matrix& pts = data.points();
    std::vector<double> avail(data.weights().data(), data.weights().data() + data.size());
    Rng rng = make_rng(seed);

    Matrix centers(k, data.dim());
    for (int c = 0; c < k; ++c) {
        const double remaining = std::accumulate(avail.begin(), avail.end(), 0.0);
        if (!(remaining > 0)) {
            throw InvalidArgument("data set has fewer than " + std::to_string(k) + " distinct points");
        }
        std::discrete_distribution<Index> pick(avail.begin(), avail.end());
        const Index chosen = pick(rng);
        centers.row(c) = pts.row(chosen);
        for (Index i = 0; i < data.size(); ++i) {
            if (avail[i] > 0 && pts.row(i) == pts.row(chosen)) {
                avail[i] = 0;
            }
        }
    }
    return centers;
}

Matrix init_scheme_i(const DataSet& data, int k, const Seed& seed, const SchemeIOptions& options) {
    if (k < 1) {
        throw InvalidArgument("need k >= 1 initial centers");
    }
    const Index distinct = count_distinct_points(data.points());
    if (distinct < k) {
        throw InvalidArgument("data set has fewer than " + std::to_string(k) + " distinct points");
    }

    int prelim = options.preliminary.value_or(
        static_cast<int>(std::ceil(k * std::log(static_cast<double>(std::max(k, 2))))));
    prelim = std::max(prelim, k);
    prelim = static_cast<int>(std::min<Index>(prelim, distinct));
    const double min_mass = options.min_mass.value_or(1.0 / (2.0 * prelim));

    const Matrix start = init_uniform_points(data, prelim, seed.child(0));
    const LloydStep step = lloyd_step(data, start);

    Vector mass = Vector::Zero(prelim);
    for (Index i = 0; i < data.size(); ++i) {
        mass[step.labels[i]] += data.weights()[i];
    }
    mass /= data.total_weight();

    std::vector<int> survivors;
    for (int c = 0; c < prelim; ++c) {
        if (mass[c] >= min_mass) {
            survivors.push_back(c);
        }
    }
    if (static_cast<int>(survivors.size()) < k) {
        survivors.resize(prelim);
        std::iota(survivors.begin(), survivors.end(), 0);
        std::stable_sort(survivors.begin(), survivors.end(), [&](int a, int b) { return mass[a] > mass[b]; });
        survivors.resize(k);
        std::sort(survivors.begin(), survivors.end());
    }

    Rng rng = make_rng(seed.child(1));
    std::uniform_int_distribution<std::size_t> first(0, survivors.size() - 1);
    std::vector<int> chosen{survivors[first(rng)]};

    const Matrix& cand = step.centers;
    Vector gap(prelim);
    for (int c : survivors) {
        gap[c] = (cand.row(c) - cand.row(chosen[0])).norm();
    }
    while (static_cast<int>(chosen.size()) < k) {
        int next = -1;
        for (int c : survivors) {
            if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) {
                continue;
            }
            if (next < 0 || gap[c] > gap[next]) {
                next = c;
            }
        }
        chosen.push_back(next);
        for (int c : survivors) {
            gap[c] = std::min(gap[c], (cand.row(c) - cand.row(next)).norm());
        }
    }

    Matrix centers(k, data.dim());
    for (int c = 0; c < k; ++c) {
        centers.row(c) = cand.row(chosen[c]);
    }
    return centers;
}

KMeansResult realistic_kmeans(const DataSet& data, int k, InitMethod init, const Seed& seed, const LloydOptions& options,
                              const SchemeIOptions& scheme) {
    const Matrix start = init == InitMethod::scheme_i ? init_scheme_i(data, k, seed, scheme)
                                                      : init_uniform_points(data, k, seed);
    return run_lloyd(data, start, options);
}

KMeansResult idealized_kmeans(const DataSet& data, int k, int restarts, const Seed& seed, const LloydOptions& options) {
    if (restarts < 1) {
        throw InvalidArgument("idealized k-means needs restarts >= 1");
    }
    std::optional<KMeansResult> best;
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = run_lloyd(data, init_uniform_points(data, k, seed.child(r)), options);
        if (!best || run.objective < best->objective) {
            best = std::move(run);
        }
    }
    return std::move(*best);
}

InitConfigurationReport report_configuration(const Matrix& centers, const Matrix& true_means, double radius) {
    if (!(radius > 0)) {
        throw InvalidArgument("radius must be positive");
    }
    if (centers.cols() != true_means.cols()) {
        throw InvalidArgument("centers and true means differ in dimension");
    }
    for (Index a = 0; a < true_means.rows(); ++a) {
        for (Index b = a + 1; b < true_means.rows(); ++b) {
            if ((true_means.row(a) - true_means.row(b)).norm() <= 2 * radius) {
                throw InvalidArgument("balls around true means overlap");
            }
        }
    }

    InitConfigurationReport out;
    out.counts.assign(true_means.rows(), 0);
    out.region_assignments.resize(centers.rows());
    for (Index c = 0; c < centers.rows(); ++c) {
        for (Index m = 0; m < true_means.rows(); ++m) {
            if ((centers.row(c) - true_means.row(m)).norm() <= radius) {
                ++out.counts[m];
                out.region_assignments[c] = static_cast<int>(m);
                break;
            }
        }
    }
    out.covered = std::all_of(out.counts.begin(), out.counts.end(), [](int c) { return c >= 1; });
    return out;
}

} // namespace kstab
