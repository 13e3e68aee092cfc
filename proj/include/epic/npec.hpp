#pragma once

// Nearest Point in Equivalence Class (NPEC).
//
// The unnormalized distance is the smallest direct L^p distance from any
// reward equivalent to R_A to R_B; NPEC divides it by the same quantity
// computed from the zero reward.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

#include "epic/core.hpp"
#include "epic/distances.hpp"
#include "epic/mlp.hpp"
#include "epic/nnls.hpp"
#include "epic/reward_function.hpp"
#include "epic/sampling.hpp"
#include "epic/stats.hpp"

namespace epic {

// ---------------------------------------------------------------------------
// Exact tabular solver
// ---------------------------------------------------------------------------

struct NpecExactResult {
    double value = 0.0;
    double scale = 0.0;
    std::vector<double> potential;
};

namespace detail {

inline bool shaping_vanishes_on_support(const CoverageDistribution& dist, double discount) {
    const auto& shape = dist.shape();
    for (std::size_t s = 0; s < shape.n_states; ++s)
        for (std::size_t a = 0; a < shape.n_actions; ++a)
            for (std::size_t t = 0; t < shape.n_states; ++t)
                if (dist.joint()[shape.index(s, a, t)] > 0.0 && (s != t || discount != 1.0))
                    return false;
    return true;
}

/// min over scale >= 0 of (E_w |scale * a - b|^p)^(1/p); convex in scale.
inline std::pair<double, double> best_scale_lp(std::span<const double> a,
                                               std::span<const double> b,
                                               std::span<const double> w, double p) {
    std::vector<double> scaled(a.size());
    auto objective = [&](double lambda) {
        for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = lambda * a[i];
        return weighted_lp(scaled, b, w, p);
    };
    double best = 0.0, best_val = objective(0.0);
    if (p == 1.0) {
        // Piecewise linear: the minimum sits on a breakpoint.
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0 || w[i] <= 0.0) continue;
            const double cand = b[i] / a[i];
            if (cand <= 0.0) continue;
            const double v = objective(cand);
            if (v < best_val) best_val = v, best = cand;
        }
        return {best, best_val};
    }
    const std::vector<double> zero(a.size(), 0.0);
    const double na = weighted_lp(a, zero, w, p), nb = weighted_lp(b, zero, w, p);
    if (na == 0.0) return {0.0, best_val};
    double lo = 0.0, hi = 2.0 * nb / na + 1.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 300 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        if (f1 < f2) {
            hi = x2, x2 = x1, f2 = f1;
            x1 = hi - phi * (hi - lo), f1 = objective(x1);
        } else {
            lo = x1, x1 = x2, f1 = f2;
            x2 = lo + phi * (hi - lo), f2 = objective(x2);
        }
    }
    const double mid = 0.5 * (lo + hi), fm = objective(mid);
    if (fm < best_val) best = mid, best_val = fm;
    return {best, best_val};
}

} // namespace detail

/// Exact D^U(a, b). p = 2 is a least-squares problem in (scale >= 0, potential).
/// Other p are supported only when shaping is null on the support of D
/// (self-loop transitions with discount 1), where the problem is one-dimensional.
inline NpecExactResult npec_unnormalized_exact(const RewardTable& a, const RewardTable& b,
                                               const CoverageDistribution& dist, double discount,
                                               double p = 2.0) {
    require_same_shape(a, b);
    if (!(a.shape() == dist.shape())) throw DimensionError("coverage shape mismatch");
    if (!(p >= 1.0)) throw ValidationError("npec: p must be >= 1");
    const auto& shape = a.shape();

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < shape.size(); ++i)
        if (dist.joint()[i] > 0.0) support.push_back(i);

    NpecExactResult out;
    out.potential.assign(shape.n_states, 0.0);
    if (p != 2.0) {
        if (!detail::shaping_vanishes_on_support(dist, discount))
            throw ValidationError("npec: exact solver handles p != 2 only when shaping is null on "
                                  "the coverage support");
        std::vector<double> av, bv, wv;
        for (auto i : support) {
            av.push_back(a.values()[i]);
            bv.push_back(b.values()[i]);
            wv.push_back(dist.joint()[i]);
        }
        std::tie(out.scale, out.value) = detail::best_scale_lp(av, bv, wv, p);
        return out;
    }

    const auto n = Eigen::Index(shape.n_states);
    const auto rows = Eigen::Index(support.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n + 1);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto flat = support[std::size_t(r)];
        const auto t = flat % shape.n_states;
        const auto s = flat / (shape.n_states * shape.n_actions);
        const double sw = std::sqrt(dist.joint()[flat]);
        A(r, 0) = sw * a.values()[flat];
        A(r, 1 + Eigen::Index(t)) += sw * discount;
        A(r, 1 + Eigen::Index(s)) -= sw;
        rhs(r) = sw * b.values()[flat];
    }
    std::vector<bool> nonneg(std::size_t(n + 1), false);
    nonneg[0] = true;
    const auto fit = active_set_least_squares(A, rhs, nonneg);
    out.scale = fit.x(0);
    for (Eigen::Index s = 0; s < n; ++s) out.potential[std::size_t(s)] = fit.x(1 + s);
    out.value = fit.residual_norm;
    return out;
}

/// D^U(a, b) / D^U(0, b), or 0 when the denominator vanishes.
inline double npec_normalized(const RewardTable& a, const RewardTable& b,
                              const CoverageDistribution& dist, double discount, double p = 2.0) {
    const RewardTable zero(a.shape());
    const double den = npec_unnormalized_exact(zero, b, dist, discount, p).value;
    const double scale = direct_distance_lp(zero, b, dist, p);
    if (den <= 1e-10 * scale || den == 0.0) return 0.0;
    const double num = npec_unnormalized_exact(a, b, dist, discount, p).value;
    return std::clamp(num / den, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Gradient-descent approximation
// ---------------------------------------------------------------------------

struct WarmStart {
    double log_scale = 0.0;
    double offset = 0.0;
    double scale = 0.0;
};

inline constexpr double kWarmStartMinScale = 1e-6;

/// argmin over scale >= 0 and offset of mean (scale * a + offset - b)^2.
inline WarmStart npec_warm_start(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() == 0 || a.size() != b.size())
        throw InsufficientDataError("npec_warm_start: need a nonempty batch of matching length");
    Eigen::MatrixXd A(a.size(), 2);
    A.col(0) = a;
    A.col(1).setOnes();
    const auto fit = active_set_least_squares(A, b, {true, false});
    WarmStart out;
    out.scale = fit.x(0);
    out.offset = fit.x(1);
    out.log_scale = std::log(out.scale > 0.0 ? out.scale : kWarmStartMinScale);
    return out;
}

/// exp(log_scale) * R_A + offset + discount * phi(s') - phi(s).
struct NpecModel {
    double log_scale = 0.0;
    double offset = 0.0;
    TinyMlp potential;
    double discount = 0.0;

    Eigen::VectorXd evaluate(const Eigen::VectorXd& ra, const TransitionBatch& batch) const {
        return std::exp(log_scale) * ra.array() + offset +
               discount * potential.forward(batch.next_states).array() -
               potential.forward(batch.states).array();
    }
};

struct NpecApproxConfig {
    /// Optimizer steps = total_samples / batch_size unless `steps` is set.
    double total_samples = 1e6;
    std::optional<std::size_t> steps;
    Eigen::Index batch_size = 4096;
    double learning_rate = 1e-2;
    Eigen::Index warm_start_size = 16386;
    Eigen::Index eval_size = 16386;
    std::size_t n_seeds = 3;
    std::uint64_t seed = 0;
    BootstrapConfig bootstrap{};

    std::size_t n_steps() const {
        return steps ? *steps : std::size_t(total_samples / double(batch_size));
    }
};

struct NpecFit {
    NpecModel model;
    double upper_bound = 0.0;
    WarmStart warm_start;
};

/// Fits the NPEC model by Adam on the squared error and reports the L2 distance
/// of the final model to R_B on a fresh batch. Every iterate is equivalent to
/// R_A, so the value bounds D^U(R_A, R_B) from above (up to sampling error).
inline NpecFit npec_fit(const RewardFunction& a, const RewardFunction& b,
                        const CoverageSampler& sampler, double discount,
                        const NpecApproxConfig& cfg, Rng& rng) {
    const auto warm_batch = sampler.transitions(cfg.warm_start_size, rng);
    NpecFit fit{{0.0, 0.0, TinyMlp::standard(a.state_dim()), discount}, 0.0, {}};
    fit.warm_start = npec_warm_start(a(warm_batch), b(warm_batch));
    fit.model.log_scale = fit.warm_start.log_scale;
    fit.model.offset = fit.warm_start.offset;
    fit.model.potential.init_xavier(rng);
    // Zero output layer: the initial potential is identically zero, so training
    // starts exactly at the warm-start solution.
    fit.model.potential.zero_output_layer();
    const auto& w = fit.model.potential.params();

    const Eigen::Index n_w = w.size();
    Eigen::VectorXd theta(n_w + 2);
    theta << fit.model.log_scale, fit.model.offset, w;
    Adam opt(theta.size(), cfg.learning_rate);
    TinyMlp::Cache cache_s, cache_next;

    for (std::size_t step = 0; step < cfg.n_steps(); ++step) {
        const auto batch = sampler.transitions(cfg.batch_size, rng);
        const Eigen::VectorXd ra = a(batch), rb = b(batch);
        const auto& mlp = fit.model.potential;
        const Eigen::VectorXd phi_s = mlp.forward(batch.states, &cache_s);
        const Eigen::VectorXd phi_next = mlp.forward(batch.next_states, &cache_next);
        const double scale = std::exp(fit.model.log_scale);
        const Eigen::VectorXd diff =
            (scale * ra.array() + fit.model.offset + discount * phi_next.array() - phi_s.array() -
             rb.array())
                .matrix();
        const Eigen::VectorXd g = (2.0 / double(batch.size())) * diff;
        Eigen::VectorXd grad(theta.size());
        grad(0) = scale * g.dot(ra);
        grad(1) = g.sum();
        grad.tail(n_w) = mlp.backward(cache_next, discount * g) - mlp.backward(cache_s, g);
        if (!grad.allFinite()) throw ConvergenceError("npec: gradient diverged (non-finite)");
        opt.step(theta, grad);
        fit.model.log_scale = theta(0);
        fit.model.offset = theta(1);
        fit.model.potential.params() = theta.tail(n_w);
    }

    // Adam keeps moving at roughly the learning rate even at an exact optimum,
    // so the warm start (zero potential) is scored as well and the better wins.
    const auto eval = sampler.transitions(cfg.eval_size, rng);
    const Eigen::VectorXd ra_eval = a(eval), rb_eval = b(eval);
    const Eigen::VectorXd resid = fit.model.evaluate(ra_eval, eval) - rb_eval;
    const Eigen::VectorXd resid0 =
        (fit.warm_start.scale * ra_eval.array() + fit.warm_start.offset - rb_eval.array()).matrix();
    fit.upper_bound = std::sqrt(std::min(resid.squaredNorm(), resid0.squaredNorm()) /
                                double(resid.size()));
    if (!std::isfinite(fit.upper_bound)) throw ConvergenceError("npec: loss is not finite");
    return fit;
}

inline RewardFunction zero_reward_like(const RewardFunction& r) {
    return RewardFunction(
        r.state_dim(), r.action_dim(),
        [](const TransitionBatch& b) { return Eigen::VectorXd::Zero(b.size()).eval(); }, "zero");
}

/// Per-seed quotient of upper bounds on D^U(a, b) and D^U(0, b). The quotient
/// is not itself a bound: it may err in either direction.
inline DistanceEstimate npec_approx_gradient(const RewardFunction& a, const RewardFunction& b,
                                             const CoverageSampler& sampler, double discount,
                                             const NpecApproxConfig& cfg = {}) {
    DistanceEstimate est;
    est.method = "npec";
    est.n_v = cfg.batch_size;
    const auto zero = zero_reward_like(a);
    for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
        try {
            Rng rng_num = make_rng(cfg.seed, 2 * s);
            Rng rng_den = make_rng(cfg.seed, 2 * s + 1);
            const double num = npec_fit(a, b, sampler, discount, cfg, rng_num).upper_bound;
            const double den = npec_fit(zero, b, sampler, discount, cfg, rng_den).upper_bound;
            est.seed_values.push_back(den > 0.0 ? num / den : 0.0);
        } catch (const ConvergenceError& e) {
            est.failures.push_back("seed " + std::to_string(s) + ": " + e.what());
        }
    }
    detail::finish_seed_estimate(est, cfg.bootstrap);
    return est;
}

} // namespace epic
