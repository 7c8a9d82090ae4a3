#ifndef KSTAB_TEST_HELPERS_HPP
#define KSTAB_TEST_HELPERS_HPP

#include "kstab/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace testing {

using namespace kstab;

inline Matrix line(std::initializer_list<double> xs) {
    Matrix m(static_cast<Index>(xs.size()), 1);
    Index i = 0;
    for (double x : xs) {
        m(i++, 0) = x;
    }
    return m;
}

inline Labels random_labels(Rng& rng, int n, int k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    Labels out(n);
    for (auto& l : out) {
        l = pick(rng);
    }
    return out;
}

/// Minimal matching distance by enumerating every permutation of max(k_a, k_b) labels.
inline double brute_force_mmd(const Labels& a, const Labels& b, int k_a, int k_b) {
    const int k = std::max(k_a, k_b);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = a.size();
    do {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            wrong += a[i] != perm[b[i]];
        }
        best = std::min(best, wrong);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(a.size());
}

} // namespace testing

#endif
