#include <gtest/gtest.h>

#include "epic/mlp.hpp"

using namespace epic;

namespace {

double loss(const TinyMlp& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
    return net.forward(X).dot(w);
}

} // namespace

TEST(TinyMlp, ParameterCount) {
    const auto net = TinyMlp::standard(3);
    EXPECT_EQ(net.n_params(), (3 * 32 + 32) + (32 * 32 + 32) + (32 + 1));
    EXPECT_THROW(TinyMlp({3, 4}), ValidationError);
}

TEST(TinyMlp, ZeroOutputLayerGivesZeroFunction) {
    auto net = TinyMlp::standard(2);
    Rng rng = make_rng(1);
    net.init_xavier(rng);
    net.zero_output_layer();
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
    EXPECT_EQ(net.forward(X).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TinyMlp, GradientsMatchFiniteDifferences) {
    Rng rng = make_rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto net = TinyMlp::standard(2);
        net.init_xavier(rng);
        for (Eigen::Index i = 0; i < net.n_params(); ++i) net.params()(i) += 0.1 * n(rng);
        Eigen::MatrixXd X(5, 2);
        Eigen::VectorXd w(5);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = n(rng);
        TinyMlp::Cache cache;
        net.forward(X, &cache);
        const Eigen::VectorXd grad = net.backward(cache, w);
        const double h = 1e-6;
        Eigen::VectorXd fd(net.n_params());
        for (Eigen::Index i = 0; i < net.n_params(); ++i) {
            const double orig = net.params()(i);
            net.params()(i) = orig + h;
            const double up = loss(net, X, w);
            net.params()(i) = orig - h;
            const double down = loss(net, X, w);
            net.params()(i) = orig;
            fd(i) = (up - down) / (2 * h);
        }
        EXPECT_LT((grad - fd).norm() / std::max(1e-12, fd.norm()), 1e-6);

        const Eigen::MatrixXd gx = net.input_gradient(X);
        for (Eigen::Index r = 0; r < X.rows(); ++r)
            for (Eigen::Index c = 0; c < X.cols(); ++c) {
                Eigen::MatrixXd Xp = X.row(r), Xm = X.row(r);
                Xp(0, c) += h;
                Xm(0, c) -= h;
                EXPECT_NEAR(gx(r, c), (net.forward(Xp)(0) - net.forward(Xm)(0)) / (2 * h), 1e-6);
            }
    }
}

TEST(Adam, MinimizesQuadratic) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 5.0);
    const Eigen::Vector3d target(1.0, -2.0, 0.5);
    Adam opt(3, 0.05);
    for (int i = 0; i < 2000; ++i) opt.step(x, 2.0 * (x - target));
    EXPECT_LT((x - target).norm(), 1e-3);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    Adam opt(2, 0.01);
    Eigen::VectorXd g(2);
    g << 3.0, -0.001;
    opt.step(x, g);
    EXPECT_NEAR(x(0), -0.01, 1e-6);
    EXPECT_NEAR(x(1), 0.01, 1e-4);
}
