#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "blockbench/nn/adam.hpp"
#include "blockbench/nn/gaussian.hpp"
#include "blockbench/nn/gradcheck.hpp"
#include "blockbench/nn/normalizer.hpp"
#include "blockbench/nn/serialize.hpp"

using namespace blockbench;
using namespace blockbench::nn;

namespace {

Mlp small_net(OutputActivation act = OutputActivation::Identity, std::uint64_t seed = 1) {
    Rng rng(seed);
    return Mlp({3, 4, 2}, act, rng);
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = standard_normal(rng);
    return m;
}

} // namespace

TEST(Mlp, HandComputedForward) {
    Rng rng(1);
    Mlp net({2, 2, 1}, OutputActivation::Identity, rng);
    net.mutable_weights()[0] << 1.0, -1.0, 2.0, 0.5;
    net.mutable_biases()[0] << 0.0, -3.0;
    net.mutable_weights()[1] << 2.0, 1.0;
    net.mutable_biases()[1] << 0.5;
    Vector x(2);
    x << 1.0, 2.0;
    // hidden = relu([1 - 2, 2 + 1 - 3]) = [0, 0]; output = 0.5
    EXPECT_DOUBLE_EQ(net.forward(x)(0), 0.5);
    x << 3.0, 1.0;
    // hidden = relu([2, 6.5 - 3]) = [2, 3.5]; output = 4 + 3.5 + 0.5
    EXPECT_DOUBLE_EQ(net.forward(x)(0), 8.0);
}

TEST(Mlp, TanhAndGaussianHeads) {
    Rng rng(2);
    Mlp tanh_net({3, 8, 4}, OutputActivation::Tanh, rng, 50.0);
    Mlp gauss({3, 8, 4}, OutputActivation::Gaussian, rng, 50.0);
    for (int i = 0; i < 100; ++i) {
        const Matrix x = random_matrix(3, 1, rng) * 10.0;
        const Matrix t = tanh_net.forward(x);
        ASSERT_LE(t.cwiseAbs().maxCoeff(), 1.0);
        const Matrix g = gauss.forward(x);
        for (int r = 2; r < 4; ++r) ASSERT_GE(g(r, 0), kStdFloor);
    }
}

TEST(Mlp, SoftplusPositiveAndStable) {
    EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
    EXPECT_GT(softplus(-800.0), 0.0 - 1e-300);
    EXPECT_TRUE(std::isfinite(softplus(800.0)));
    EXPECT_NEAR(softplus(800.0), 800.0, 1e-9);
    EXPECT_NEAR(softplus(-40.0), std::exp(-40.0), 1e-25);
}

TEST(Mlp, SingleLayerWeightGradientIsOuterProduct) {
    Rng rng(3);
    Mlp net({3, 2}, OutputActivation::Identity, rng);
    const Matrix x = random_matrix(3, 1, rng);
    const Matrix g = random_matrix(2, 1, rng);
    ForwardCache cache;
    net.forward(x, &cache);
    const auto grads = net.backward(cache, g);
    EXPECT_LT((grads.weights[0] - g * x.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((grads.biases[0] - g.col(0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
    for (auto act : {OutputActivation::Identity, OutputActivation::Tanh, OutputActivation::Gaussian}) {
        Rng rng(4);
        Mlp net({5, 16, 16, 4}, act, rng);
        GradCheckOptions opt;
        const auto r = check_gradients(to_string(act), net, rng, opt);
        EXPECT_TRUE(r.passed) << r.name << " max_rel=" << r.max_relative_error;
        EXPECT_GT(r.checked, 0);
    }
}

TEST(Mlp, ZeroUpstreamGradientGivesZeroGradients) {
    Rng rng(5);
    auto net = small_net();
    ForwardCache cache;
    net.forward(random_matrix(3, 4, rng), &cache);
    Matrix gin;
    const auto grads = net.backward(cache, Matrix::Zero(2, 4), &gin);
    EXPECT_EQ(grads.squared_norm(), 0.0);
    EXPECT_EQ(gin.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, StaleOrForeignCacheRejected) {
    Rng rng(6);
    auto net = small_net();
    auto other = small_net(OutputActivation::Identity, 2);
    ForwardCache cache;
    net.forward(random_matrix(3, 2, rng), &cache);
    EXPECT_THROW(other.backward(cache, Matrix::Ones(2, 2)), DomainError);
    net.mutable_weights()[0](0, 0) += 1.0;
    EXPECT_THROW(net.backward(cache, Matrix::Ones(2, 2)), DomainError);
}

TEST(Mlp, ShapeMismatchRejected) {
    auto net = small_net();
    EXPECT_THROW(net.forward(Matrix(Matrix::Zero(4, 1))), DomainError);
}

TEST(Mlp, FlattenAssignRoundTrip) {
    auto net = small_net();
    auto copy = small_net(OutputActivation::Identity, 9);
    copy.assign(net.flatten());
    EXPECT_TRUE(copy == net);
    EXPECT_EQ(net.parameter_count(), 3u * 4 + 4 + 4 * 2 + 2);
}

TEST(Mlp, SoftUpdateExamples) {
    Rng rng(7);
    Mlp target({1, 1}, OutputActivation::Identity, rng);
    Mlp online = target;
    target.set_parameter(0, 0.0);
    online.set_parameter(0, 1.0);
    soft_update(target, online, 0.05);
    EXPECT_NEAR(target.parameter(0), 0.05, 1e-15);
    soft_update(target, online, 1.0);
    EXPECT_EQ(target.parameter(0), 1.0);
}

TEST(Mlp, SoftUpdateGeometricDrift) {
    Rng rng(8);
    Mlp target({2, 3, 1}, OutputActivation::Identity, rng);
    const Mlp online({2, 3, 1}, OutputActivation::Identity, rng);
    const auto t0 = target.flatten();
    const auto o = online.flatten();
    const double tau = 0.05;
    for (int k = 1; k <= 40; ++k) {
        soft_update(target, online, tau);
        const double decay = std::pow(1.0 - tau, k);
        for (std::size_t i = 0; i < o.size(); ++i)
            ASSERT_NEAR(target.parameter(i) - o[i], decay * (t0[i] - o[i]), 1e-12);
    }
}

TEST(Adam, FirstStepMovesByLearningRate) {
    auto net = small_net();
    auto state = AdamState::for_network(net, 0.01);
    auto grads = Gradients::zeros_like(net);
    grads.weights[0](1, 2) = 3.7;
    grads.biases[1](0) = -0.2;
    const double w = net.weights()[0](1, 2);
    const double b = net.biases()[1](0);
    ASSERT_TRUE(adam_step(net, grads, state));
    // Bias-corrected m/sqrt(v) is sign(g) on the first step.
    EXPECT_NEAR(net.weights()[0](1, 2), w - 0.01, 1e-9);
    EXPECT_NEAR(net.biases()[1](0), b + 0.01, 1e-8);
    EXPECT_EQ(state.step, 1);
}

TEST(Adam, ZeroGradientsAndZeroRateLeaveParameters) {
    auto net = small_net();
    const auto before = net.flatten();
    auto state = AdamState::for_network(net, 0.01);
    ASSERT_TRUE(adam_step(net, Gradients::zeros_like(net), state));
    EXPECT_EQ(net.flatten(), before);

    auto zero_rate = AdamState::for_network(net, 0.0);
    auto grads = Gradients::zeros_like(net);
    grads.weights[1].setConstant(1.0);
    ASSERT_TRUE(adam_step(net, grads, zero_rate));
    EXPECT_EQ(net.flatten(), before);
}

TEST(Adam, NonFiniteGradientSkipped) {
    auto net = small_net();
    const auto before = net.flatten();
    auto state = AdamState::for_network(net, 0.01);
    auto grads = Gradients::zeros_like(net);
    grads.weights[0](0, 0) = std::nan("");
    EXPECT_FALSE(adam_step(net, grads, state));
    EXPECT_EQ(net.flatten(), before);
    EXPECT_EQ(state.step, 0);
}

TEST(Adam, MinimizesQuadratic) {
    Rng rng(9);
    Mlp net({1, 1}, OutputActivation::Identity, rng);
    auto state = AdamState::for_network(net, 0.05);
    for (int i = 0; i < 2000; ++i) {
        // loss = (w - 3)^2 + (b + 1)^2
        auto g = Gradients::zeros_like(net);
        g.weights[0](0, 0) = 2.0 * (net.weights()[0](0, 0) - 3.0);
        g.biases[0](0) = 2.0 * (net.biases()[0](0) + 1.0);
        adam_step(net, g, state);
    }
    EXPECT_NEAR(net.weights()[0](0, 0), 3.0, 1e-3);
    EXPECT_NEAR(net.biases()[0](0), -1.0, 1e-3);
}

TEST(Normalizer, FreshIsIdentityWithinClip) {
    RunningNormalizer n(3);
    Vector x(3);
    x << 0.5, -2.0, 4.9;
    EXPECT_LT((n.normalize(x) - x).cwiseAbs().maxCoeff(), 1e-7);
    x << 0.0, 0.0, 9.0;
    EXPECT_EQ(n.normalize(x)(2), 5.0);
}

TEST(Normalizer, MatchesTwoPassStatistics) {
    Rng rng(10);
    RunningNormalizer n(4);
    Matrix all(4, 0);
    for (int chunk = 0; chunk < 20; ++chunk) {
        const int cols = 1 + chunk % 7;
        Matrix m = random_matrix(4, cols, rng) * 3.0;
        m.array() += 2.0;
        n.update(m);
        Matrix grown(4, all.cols() + cols);
        grown << all, m;
        all = grown;
    }
    const Vector mean = all.rowwise().mean();
    const Vector var = (all.colwise() - mean).array().square().rowwise().mean();
    EXPECT_EQ(n.count(), static_cast<double>(all.cols()));
    EXPECT_LT((n.mean() - mean).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((n.variance() - var).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Normalizer, UpdateOrderInvariant) {
    Rng rng(11);
    const Matrix a = random_matrix(2, 5, rng);
    const Matrix b = random_matrix(2, 9, rng) * 4.0;
    const Matrix c = random_matrix(2, 3, rng).array() + 7.0;
    RunningNormalizer x(2);
    RunningNormalizer y(2);
    x.update(a);
    x.update(b);
    x.update(c);
    y.update(c);
    y.update(a);
    y.update(b);
    EXPECT_LT((x.mean() - y.mean()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((x.variance() - y.variance()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Normalizer, ConstantFeatureMapsToZero) {
    RunningNormalizer n(2);
    Matrix m(2, 10);
    m.row(0).setConstant(4.2);
    m.row(1).setLinSpaced(10, 0.0, 1.0);
    n.update(m);
    Vector x(2);
    x << 4.2, 0.5;
    EXPECT_NEAR(n.normalize(x)(0), 0.0, 1e-9);
}

TEST(Gaussian, LogProbAtMeanClosedForm) {
    Vector mu(2);
    mu << 0.3, -0.1;
    Vector sd(2);
    sd << 0.5, 2.0;
    const double expected = -std::log(0.5) - std::log(2.0) - std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(diag_gaussian_log_prob(mu, sd, mu), expected, 1e-12);
}

TEST(Gaussian, LogProbGradientMatchesFiniteDifferences) {
    Rng rng(12);
    Vector mu = random_matrix(3, 1, rng).col(0);
    Vector sd = (random_matrix(3, 1, rng).array().abs() + 0.2).matrix().col(0);
    const Vector x = random_matrix(3, 1, rng).col(0);
    const auto g = diag_gaussian_log_prob_grad(mu, sd, x);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        Vector mp = mu, mm = mu, sp = sd, sm = sd;
        mp(i) += h;
        mm(i) -= h;
        sp(i) += h;
        sm(i) -= h;
        EXPECT_NEAR(g.d_mean(i), (diag_gaussian_log_prob(mp, sd, x) - diag_gaussian_log_prob(mm, sd, x)) / (2 * h), 1e-6);
        EXPECT_NEAR(g.d_std(i), (diag_gaussian_log_prob(mu, sp, x) - diag_gaussian_log_prob(mu, sm, x)) / (2 * h), 1e-6);
    }
}

TEST(Serialize, ParametersAndNormalizerRoundTripBitExact) {
    Rng rng(13);
    Mlp net({4, 8, 3}, OutputActivation::Tanh, rng);
    RunningNormalizer norm(4);
    norm.update(random_matrix(4, 17, rng));
    std::stringstream buf;
    BinaryWriter w(buf);
    write_parameters(w, net);
    write_normalizer(w, norm);

    Mlp loaded({4, 8, 3}, OutputActivation::Tanh, rng);
    RunningNormalizer norm2(4);
    BinaryReader r(buf);
    read_parameters(r, loaded);
    read_normalizer(r, norm2);
    EXPECT_TRUE(loaded == net);
    EXPECT_TRUE(norm2 == norm);
}

TEST(Serialize, LittleEndianLayout) {
    std::stringstream buf;
    BinaryWriter w(buf);
    w.u32(0x01020304u);
    w.f64(1.0);
    const std::string s = buf.str();
    ASSERT_EQ(s.size(), 12u);
    EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x04);
    EXPECT_EQ(static_cast<unsigned char>(s[3]), 0x01);
    // 1.0 = 0x3FF0000000000000
    EXPECT_EQ(static_cast<unsigned char>(s[10]), 0xF0);
    EXPECT_EQ(static_cast<unsigned char>(s[11]), 0x3F);
}

TEST(Serialize, TruncatedInputThrows) {
    std::stringstream buf("abc");
    BinaryReader r(buf);
    EXPECT_ANY_THROW(r.f64());
}
