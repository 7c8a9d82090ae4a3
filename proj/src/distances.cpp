#include "kstab/distances.hpp"

#include "kstab/assignment.hpp"
#include "kstab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace kstab {

namespace {

void require_pair_counting(const LabelPair& pair) {
    if (pair.size() < 2) {
        throw InvalidArgument("pair-counting distances need at least two points");
    }
}

double choose2(double m) {
    return m * (m - 1) / 2;
}

struct PairCounts {
    double both = 0;   // co-clustered in a and in b
    double in_a = 0;   // co-clustered in a
    double in_b = 0;   // co-clustered in b
};

PairCounts pair_counts(const LabelPair& pair) {
    const Eigen::MatrixXi table = contingency_table(pair);
    PairCounts out;
    for (Index i = 0; i < table.rows(); ++i) {
        for (Index j = 0; j < table.cols(); ++j) {
            out.both += choose2(table(i, j));
        }
    }
    for (Index i = 0; i < table.rows(); ++i) {
        out.in_a += choose2(table.row(i).sum());
    }
    for (Index j = 0; j < table.cols(); ++j) {
        out.in_b += choose2(table.col(j).sum());
    }
    return out;
}

double entropy(const Eigen::VectorXd& counts, double n) {
    double h = 0;
    for (Index i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) {
            const double p = counts[i] / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace

LabelPair make_label_pair(Labels a, Labels b, std::optional<int> k_a, std::optional<int> k_b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("labelings differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    if (a.empty()) {
        throw InvalidArgument("labelings must be non-empty");
    }
    auto range = [](const Labels& labels, std::optional<int> k, const char* which) {
        const int top = *std::max_element(labels.begin(), labels.end());
        const int low = *std::min_element(labels.begin(), labels.end());
        const int resolved = k.value_or(top + 1);
        if (low < 0 || top >= resolved) {
            throw InvalidArgument(std::string("labels of ") + which + " outside their declared range");
        }
        return resolved;
    };
    const int ka = range(a, k_a, "first labeling");
    const int kb = range(b, k_b, "second labeling");
    return LabelPair{std::move(a), std::move(b), ka, kb};
}

Eigen::MatrixXi contingency_table(const LabelPair& pair) {
    if (pair.a.size() != pair.b.size()) {
        throw InvalidArgument("labelings differ in length");
    }
    Eigen::MatrixXi table = Eigen::MatrixXi::Zero(pair.k_a, pair.k_b);
    for (std::size_t i = 0; i < pair.a.size(); ++i) {
        ++table(pair.a[i], pair.b[i]);
    }
    return table;
}

double minimal_matching_distance(const LabelPair& pair) {
    const Eigen::MatrixXi table = contingency_table(pair);
    const int k = std::max(pair.k_a, pair.k_b);
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> cost =
        Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
    cost.topLeftCorner(pair.k_a, pair.k_b) = -table.cast<long long>();

    const std::vector<int> match = solve_assignment(cost);
    long long agree = 0;
    for (int r = 0; r < k; ++r) {
        agree -= cost(r, match[r]);
    }
    const auto n = static_cast<long long>(pair.a.size());
    return static_cast<double>(n - agree) / static_cast<double>(n);
}

double hamming_distance(const LabelPair& pair) {
    if (pair.a.size() != pair.b.size() || pair.a.empty()) {
        throw InvalidArgument("hamming distance needs equal-length non-empty labelings");
    }
    std::size_t differ = 0;
    for (std::size_t i = 0; i < pair.a.size(); ++i) {
        differ += pair.a[i] != pair.b[i];
    }
    return static_cast<double>(differ) / static_cast<double>(pair.a.size());
}

double rand_distance(const LabelPair& pair) {
    require_pair_counting(pair);
    const PairCounts c = pair_counts(pair);
    return (c.in_a + c.in_b - 2 * c.both) / choose2(static_cast<double>(pair.size()));
}

double jaccard_distance(const LabelPair& pair) {
    require_pair_counting(pair);
    const PairCounts c = pair_counts(pair);
    const double either = c.in_a + c.in_b - c.both;
    if (either == 0) {
        return 0;
    }
    return 1 - c.both / either;
}

double variation_of_information(const LabelPair& pair) {
    const Eigen::MatrixXd table = contingency_table(pair).cast<double>();
    const double n = static_cast<double>(pair.size());
    const Eigen::VectorXd joint = table.reshaped();
    const double h_joint = entropy(joint, n);
    const double h_a = entropy(table.rowwise().sum(), n);
    const double h_b = entropy(table.colwise().sum().transpose(), n);
    // H(A)+H(B)-2I = 2H(A,B)-H(A)-H(B)
    return std::max(0.0, 2 * h_joint - h_a - h_b);
}

double distance(DistanceKind kind, const LabelPair& pair) {
    switch (kind) {
    case DistanceKind::minimal_matching:
        return minimal_matching_distance(pair);
    case DistanceKind::hamming:
        return hamming_distance(pair);
    case DistanceKind::rand:
        return rand_distance(pair);
    case DistanceKind::jaccard:
        return jaccard_distance(pair);
    case DistanceKind::variation_of_information:
        return variation_of_information(pair);
    }
    throw InvalidArgument("unknown distance kind");
}

std::string to_string(DistanceKind kind) {
    switch (kind) {
    case DistanceKind::minimal_matching:
        return "mmd";
    case DistanceKind::hamming:
        return "hamming";
    case DistanceKind::rand:
        return "rand";
    case DistanceKind::jaccard:
        return "jaccard";
    case DistanceKind::variation_of_information:
        return "vi";
    }
    return "unknown";
}

DistanceKind parse_distance(std::string_view name) {
    for (auto kind : {DistanceKind::minimal_matching, DistanceKind::hamming, DistanceKind::rand, DistanceKind::jaccard,
                      DistanceKind::variation_of_information}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw InvalidArgument("unknown distance '" + std::string(name) + "' (expected mmd, hamming, rand, jaccard or vi)");
}

Labels extend_by_centers(const Clustering& clustering, const Matrix& points) {
    if (!clustering.centers) {
        throw InvalidArgument("extension by centers needs a clustering that carries its centers");
    }
    return assign_labels(points, *clustering.centers);
}

LabelPair restrict_to_overlap(const Clustering& a, const Clustering& b) {
    if (a.root_id != b.root_id) {
        throw InvalidArgument("clusterings live on different root data sets ('" + a.root_id + "' vs '" + b.root_id + "')");
    }
    if (a.domain.size() != a.labels.size() || b.domain.size() != b.labels.size()) {
        throw InvalidArgument("restriction needs clusterings with a recorded domain");
    }
    std::unordered_map<Index, int> label_b;
    label_b.reserve(b.domain.size());
    for (std::size_t i = 0; i < b.domain.size(); ++i) {
        label_b.emplace(b.domain[i], b.labels[i]);
    }
    std::vector<std::pair<Index, int>> shared;
    std::unordered_map<Index, bool> seen;
    for (std::size_t i = 0; i < a.domain.size(); ++i) {
        if (seen.emplace(a.domain[i], true).second && label_b.count(a.domain[i])) {
            shared.emplace_back(a.domain[i], a.labels[i]);
        }
    }
    if (shared.empty()) {
        throw InvalidArgument("clusterings share no points");
    }
    std::sort(shared.begin(), shared.end());
    LabelPair out;
    out.k_a = a.k;
    out.k_b = b.k;
    for (const auto& [origin, label] : shared) {
        out.a.push_back(label);
        out.b.push_back(label_b.at(origin));
    }
    return out;
}

} // namespace kstab
