#ifndef KSTAB_ASSIGNMENT_HPP
#define KSTAB_ASSIGNMENT_HPP

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <vector>

namespace kstab {

/**
 * @brief Minimum-cost perfect matching on a square cost matrix (Hungarian method with potentials, O(K^3)).
 *
 * Returns `row_to_col` with `row_to_col[r]` the column matched to row `r`.
 * Integer scalars give exact results.
 */
template <typename Derived>
std::vector<int> solve_assignment(const Eigen::MatrixBase<Derived>& cost) {
    using Scalar = typename Derived::Scalar;
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != cost.rows()) {
        throw std::invalid_argument("assignment cost matrix must be square");
    }
    if (n == 0) {
        return {};
    }

    // 1-based arrays; column 0 is a virtual start node.
    const Scalar inf = std::numeric_limits<Scalar>::max() / 4;
    std::vector<Scalar> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int r = 1; r <= n; ++r) {
        match[0] = r;
        int col = 0;
        std::vector<Scalar> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[col] = 1;
            const int row = match[col];
            Scalar delta = inf;
            int next = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const Scalar reduced = cost(row - 1, j - 1) - u[row] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = col;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    next = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col = next;
        } while (match[col] != 0);
        do {
            const int prev = way[col];
            match[col] = match[prev];
            col = prev;
        } while (col != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        row_to_col[match[j] - 1] = j - 1;
    }
    return row_to_col;
}

} // namespace kstab

#endif
