#pragma once

// Lawson-Hanson active set method for least squares with nonnegativity
// constraints on a subset of the variables:
//
//   minimize ||A x - b||_2  subject to  x_i >= 0 for every i with nonneg[i].
//
// Unconstrained ("free") variables always stay in the passive set. Subproblems
// are solved with a complete orthogonal decomposition, so rank-deficient
// column sets yield the minimum-norm solution.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "epic/core.hpp"

namespace epic {

struct NnlsResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
};

namespace detail {

inline Eigen::VectorXd solve_passive(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                     const std::vector<bool>& passive) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (passive[std::size_t(j)]) cols.push_back(j);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(A.cols());
    if (cols.empty()) return z;
    Eigen::MatrixXd sub(A.rows(), Eigen::Index(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(Eigen::Index(k)) = A.col(cols[k]);
    const Eigen::VectorXd zs = sub.completeOrthogonalDecomposition().solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(Eigen::Index(k));
    return z;
}

} // namespace detail

inline NnlsResult active_set_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                           const std::vector<bool>& nonneg, int max_iter = 0) {
    const Eigen::Index n = A.cols();
    if (A.rows() != b.size()) throw DimensionError("nnls: A and b row counts differ");
    if (std::size_t(n) != nonneg.size()) throw DimensionError("nnls: constraint mask size");
    if (max_iter <= 0) max_iter = 3 * int(n) + 30;

    const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                       std::max<double>(1.0, A.cwiseAbs().maxCoeff()) *
                       double(std::max(A.rows(), n));

    std::vector<bool> passive(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) passive[std::size_t(j)] = !nonneg[std::size_t(j)];

    Eigen::VectorXd x = detail::solve_passive(A, b, passive);
    NnlsResult out;

    for (int outer = 0; outer < max_iter; ++outer) {
        ++out.iterations;
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[std::size_t(j)] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        if (best < 0) break;
        passive[std::size_t(best)] = true;

        bool stalled = false;
        for (int inner = 0; inner < max_iter; ++inner) {
            const Eigen::VectorXd z = detail::solve_passive(A, b, passive);
            if (inner == 0 && z(best) <= 0.0) {
                // Positive gradient but the subproblem disagrees: rounding noise.
                passive[std::size_t(best)] = false;
                stalled = true;
                break;
            }
            double alpha = 1.0;
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!passive[std::size_t(j)] || !nonneg[std::size_t(j)]) continue;
                if (z(j) <= 0.0) {
                    feasible = false;
                    const double denom = x(j) - z(j);
                    if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[std::size_t(j)] && nonneg[std::size_t(j)] && x(j) <= tol) {
                    passive[std::size_t(j)] = false;
                    x(j) = 0.0;
                }
        }
        if (stalled) break;
    }
    out.x = x;
    out.residual_norm = (A * x - b).norm();
    return out;
}

} // namespace epic
