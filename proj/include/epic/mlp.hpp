#pragma once

// Small feed-forward network with hand-written reverse-mode gradients, plus Adam.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "epic/core.hpp"
#include "epic/reward_function.hpp"

namespace epic {

/// tanh hidden layers, linear scalar output. Parameters live in one flat vector
/// laid out layer by layer as (W column-major, then b).
class TinyMlp {
  public:
    struct Cache {
        std::vector<Eigen::MatrixXd> activations; // input, then each hidden layer
    };

    explicit TinyMlp(std::vector<Eigen::Index> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2 || sizes_.back() != 1)
            throw ValidationError("TinyMlp: need at least input and scalar output layers");
        Eigen::Index total = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            offsets_.push_back(total);
            total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
        }
        params_ = Eigen::VectorXd::Zero(total);
    }

    /// input -> 32 -> 32 -> 1.
    static TinyMlp standard(Eigen::Index input_dim) { return TinyMlp({input_dim, 32, 32, 1}); }

    void init_xavier(Rng& rng) {
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const double limit = std::sqrt(6.0 / double(sizes_[l] + sizes_[l + 1]));
            std::uniform_real_distribution<double> u(-limit, limit);
            auto W = weights(l);
            for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = u(rng);
            bias(l).setZero();
        }
    }

    void zero_output_layer() {
        const std::size_t last = sizes_.size() - 2;
        weights(last).setZero();
        bias(last).setZero();
    }

    Eigen::Index input_dim() const { return sizes_.front(); }
    Eigen::Index n_params() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::VectorXd& params() { return params_; }

    /// X has one sample per row.
    Eigen::VectorXd forward(const Eigen::MatrixXd& X, Cache* cache = nullptr) const {
        if (X.cols() != input_dim()) throw DimensionError("TinyMlp: input width mismatch");
        if (cache) cache->activations.assign(1, X);
        Eigen::MatrixXd h = X;
        const std::size_t n_layers = sizes_.size() - 1;
        for (std::size_t l = 0; l < n_layers; ++l) {
            Eigen::MatrixXd z = h * weights(l).transpose();
            z.rowwise() += bias(l).transpose();
            if (l + 1 < n_layers) {
                h = z.array().tanh().matrix();
                if (cache) cache->activations.push_back(h);
            } else {
                h = std::move(z);
            }
        }
        return h.col(0);
    }

    /// Gradient of sum_i dout_i * f(x_i) with respect to the parameters.
    Eigen::VectorXd backward(const Cache& cache, const Eigen::VectorXd& dout) const {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params());
        const std::size_t n_layers = sizes_.size() - 1;
        Eigen::MatrixXd delta = dout; // N x 1, gradient w.r.t. pre-activation of layer l
        for (std::size_t l = n_layers; l-- > 0;) {
            const Eigen::MatrixXd& input = cache.activations[l];
            Eigen::Map<Eigen::MatrixXd> gW(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
            Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + sizes_[l + 1] * sizes_[l],
                                           sizes_[l + 1]);
            gW = delta.transpose() * input;
            gb = delta.colwise().sum().transpose();
            if (l > 0) {
                Eigen::MatrixXd back = delta * weights(l);
                delta = (back.array() * (1.0 - input.array().square())).matrix();
            }
        }
        return grad;
    }

    /// d f(x) / d x for each row of X.
    Eigen::MatrixXd input_gradient(const Eigen::MatrixXd& X) const {
        Cache cache;
        forward(X, &cache);
        const std::size_t n_layers = sizes_.size() - 1;
        Eigen::MatrixXd delta = Eigen::MatrixXd::Ones(X.rows(), 1);
        for (std::size_t l = n_layers; l-- > 0;) {
            Eigen::MatrixXd back = delta * weights(l);
            if (l > 0)
                delta = (back.array() * (1.0 - cache.activations[l].array().square())).matrix();
            else
                delta = std::move(back);
        }
        return delta;
    }

  private:
    Eigen::Map<Eigen::MatrixXd> weights(std::size_t l) {
        return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
    }
    Eigen::Map<const Eigen::MatrixXd> weights(std::size_t l) const {
        return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
    }
    Eigen::Map<Eigen::VectorXd> bias(std::size_t l) {
        return {params_.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]};
    }
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const {
        return {params_.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]};
    }

    std::vector<Eigen::Index> sizes_;
    std::vector<Eigen::Index> offsets_;
    Eigen::VectorXd params_;
};

class Adam {
  public:
    explicit Adam(Eigen::Index n, double lr = 1e-2, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(n)),
          v_(Eigen::VectorXd::Zero(n)) {}

    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1_, double(t_));
        const double c2 = 1.0 - std::pow(beta2_, double(t_));
        params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
    }

  private:
    double lr_, beta1_, beta2_, eps_;
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

} // namespace epic
