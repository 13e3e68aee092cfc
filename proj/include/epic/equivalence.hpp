#pragma once

#include <Eigen/Dense>

#include <optional>

#include "epic/core.hpp"
#include "epic/nnls.hpp"

namespace epic {

struct EquivalenceCheck {
    bool equivalent = false;
    double max_residual = 0.0;
    std::optional<EquivalenceTransform> transform;
};

/// Decides whether `b` = scale * `a` + shaping for some scale > 0 and potential.
/// (scale, potential) is fit by least squares with scale >= 1e-12; the pair is
/// accepted when the max-norm residual of the fit is at most `tol`.
inline EquivalenceCheck check_equivalent(const RewardTable& a, const RewardTable& b,
                                         double discount, double tol) {
    require_same_shape(a, b);
    constexpr double kMinScale = 1e-12;
    const auto& shape = a.shape();
    const auto n = Eigen::Index(shape.n_states);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(shape.size()), n + 1);
    Eigen::VectorXd rhs(Eigen::Index(shape.size()));
    for (std::size_t s = 0; s < shape.n_states; ++s)
        for (std::size_t u = 0; u < shape.n_actions; ++u)
            for (std::size_t t = 0; t < shape.n_states; ++t) {
                const auto row = Eigen::Index(shape.index(s, u, t));
                A(row, 0) = a(s, u, t);
                A(row, 1 + Eigen::Index(t)) += discount;
                A(row, 1 + Eigen::Index(s)) -= 1.0;
                rhs(row) = b(s, u, t) - kMinScale * a(s, u, t);
            }
    std::vector<bool> nonneg(std::size_t(n + 1), false);
    nonneg[0] = true;
    const auto fit = active_set_least_squares(A, rhs, nonneg);

    EquivalenceTransform tf;
    tf.scale = fit.x(0) + kMinScale;
    tf.potential.assign(fit.x.data() + 1, fit.x.data() + 1 + n);

    EquivalenceCheck out;
    const RewardTable fitted = apply_equivalence(a, tf, discount);
    for (std::size_t i = 0; i < b.size(); ++i)
        out.max_residual = std::max(out.max_residual, std::abs(fitted.values()[i] - b.values()[i]));
    out.equivalent = out.max_residual <= tol;
    if (out.equivalent) out.transform = std::move(tf);
    return out;
}

} // namespace epic
