#include "kstab/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace kstab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

DataSet::DataSet(Matrix points, Vector weights, std::string root_id, std::vector<Index> origin)
    : points_(std::move(points)), weights_(std::move(weights)), root_id_(std::move(root_id)), origin_(std::move(origin)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
        throw InvalidArgument("data set needs at least one point and one dimension");
    }
    if (weights_.size() != points_.rows()) {
        throw InvalidArgument("weight vector length does not match the number of points");
    }
    if (static_cast<Index>(origin_.size()) != points_.rows()) {
        throw InvalidArgument("origin index list length does not match the number of points");
    }
    if (!points_.allFinite()) {
        throw InvalidArgument("data set contains non-finite coordinates");
    }
    for (Index i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0) || !std::isfinite(weights_[i])) {
            throw InvalidArgument("weight at index " + std::to_string(i) + " is not a positive finite number");
        }
    }
    total_weight_ = weights_.sum();
    if (!std::isfinite(total_weight_)) {
        throw InvalidArgument("total weight is not finite");
    }
}

bool DataSet::unit_weights() const {
    return (weights_.array() == 1.0).all();
}

DataSet make_dataset(Matrix points, std::optional<Vector> weights, std::string id) {
    if (points.size() == 0) {
        throw InvalidArgument("cannot build a data set from an empty matrix");
    }
    const Index n = points.rows();
    Vector w = weights ? std::move(*weights) : Vector::Ones(n);
    std::vector<Index> origin(n);
    std::iota(origin.begin(), origin.end(), Index{0});
    return DataSet(std::move(points), std::move(w), std::move(id), std::move(origin));
}

DataSet subset(const DataSet& data, std::span<const Index> indices) {
    if (indices.empty()) {
        throw InvalidArgument("subset needs at least one index");
    }
    const Index m = static_cast<Index>(indices.size());
    Matrix pts(m, data.dim());
    Vector w(m);
    std::vector<Index> origin(m);
    for (Index r = 0; r < m; ++r) {
        const Index i = indices[r];
        if (i < 0 || i >= data.size()) {
            throw InvalidArgument("subset index " + std::to_string(i) + " out of range for " + std::to_string(data.size()) + " points");
        }
        pts.row(r) = data.points().row(i);
        w[r] = data.weights()[i];
        origin[r] = data.origin()[i];
    }
    return DataSet(std::move(pts), std::move(w), data.root_id(), std::move(origin));
}

DataSet with_points(const DataSet& data, Matrix points) {
    if (points.rows() != data.size()) {
        throw InvalidArgument("replacement coordinates have the wrong number of rows");
    }
    return DataSet(std::move(points), data.weights(), data.root_id(), data.origin());
}

void validate(const Clustering& clustering) {
    if (clustering.k < 1) {
        throw InvalidArgument("a clustering needs k >= 1");
    }
    for (int label : clustering.labels) {
        if (label < 0 || label >= clustering.k) {
            throw InvalidArgument("label " + std::to_string(label) + " outside 0.." + std::to_string(clustering.k - 1));
        }
    }
    if (clustering.centers && clustering.centers->rows() != clustering.k) {
        throw InvalidArgument("clustering centers must have exactly k rows");
    }
    if (!clustering.domain.empty() && clustering.domain.size() != clustering.labels.size()) {
        throw InvalidArgument("clustering domain and labels differ in length");
    }
}

Clustering make_clustering(const DataSet& data, Labels labels, int k, std::optional<Matrix> centers) {
    if (static_cast<Index>(labels.size()) != data.size()) {
        throw InvalidArgument("label vector length does not match the data set size");
    }
    Clustering out{std::move(labels), k, std::move(centers), data.root_id(), data.origin()};
    validate(out);
    return out;
}

Seed Seed::child(std::uint64_t index) const {
    Seed out = *this;
    out.path.push_back(index);
    return out;
}

std::uint64_t Seed::key() const {
    std::uint64_t h = splitmix64(root);
    for (std::uint64_t p : path) {
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

Seed derive_stream(const Seed& seed, std::uint64_t index) {
    return seed.child(index);
}

Rng make_rng(const Seed& seed) {
    const std::uint64_t k = seed.key();
    std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                      static_cast<std::uint32_t>(seed.path.size())};
    return Rng(seq);
}

std::string tagged_id(std::string_view kind, const Seed& seed) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(seed.key()));
    return std::string(kind) + ":" + buf;
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& task) {
    if (count <= 0) {
        return;
    }
    const int workers = static_cast<int>(std::min<Index>(std::max(threads, 1), count));
    if (workers == 1) {
        for (Index i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }

    std::atomic<Index> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&]() {
        for (Index i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = count;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace kstab
