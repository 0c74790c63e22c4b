#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "flexsac/nn.hpp"
#include "gradcheck.hpp"

using namespace flexsac;
using namespace flexsac::nn;

TEST(Mlp, ParameterCount) {
    const Mlp net({26, 64, 64, 2});
    EXPECT_EQ(net.parameter_count(), 27 * 64 + 65 * 64 + 65 * 2);
    EXPECT_EQ(net.layer_count(), 3);
}

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
    const Mlp net({3, 5, 5, 2});
    Matrix x(3, 4);
    x.setRandom();
    EXPECT_EQ(net.predict(x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, SingleLayerIsAffine) {
    Mlp net({2, 2});
    // Column-major W = [[1, 2], [3, 4]], b = [0.5, -1].
    net.params() << 1.0, 3.0, 2.0, 4.0, 0.5, -1.0;
    Matrix x(2, 1);
    x << 0.25, -2.0;
    const Matrix y = net.predict(x);
    EXPECT_DOUBLE_EQ(y(0, 0), 1.0 * 0.25 + 2.0 * -2.0 + 0.5);
    EXPECT_DOUBLE_EQ(y(1, 0), 3.0 * 0.25 + 4.0 * -2.0 - 1.0);
}

TEST(Mlp, RejectsBadInputs) {
    const Mlp net({3, 4, 1});
    EXPECT_THROW(net.predict(Matrix::Zero(2, 1)), ShapeError);
    Matrix x = Matrix::Zero(3, 1);
    x(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(net.predict(x), ShapeError);
}

TEST(Mlp, BackwardWithoutForwardIsStateError) {
    const Mlp net({3, 4, 1});
    ForwardCache cache;
    EXPECT_THROW(net.backward(cache, Matrix::Ones(1, 1)), StateError);
}

TEST(Mlp, QuadraticLossOnLinearNet) {
    Mlp net({2, 2});
    net.params() << 0.3, -0.7, 1.1, 0.2, 0.05, -0.4;
    Matrix x(2, 1);
    x << 1.5, -0.5;
    Matrix y(2, 1);
    y << 0.1, 0.9;
    ForwardCache cache;
    const Matrix out = net.forward(x, cache);
    const Vector g = net.backward(cache, 2.0 * (out - y));
    // dL/dW = 2 (Wx + b - y) x^T, dL/db = 2 (Wx + b - y).
    const double w00 = 0.3, w10 = -0.7, w01 = 1.1, w11 = 0.2, b0 = 0.05, b1 = -0.4;
    const double r0 = 2.0 * (w00 * 1.5 + w01 * -0.5 + b0 - 0.1);
    const double r1 = 2.0 * (w10 * 1.5 + w11 * -0.5 + b1 - 0.9);
    EXPECT_NEAR(g[0], r0 * 1.5, 1e-14);
    EXPECT_NEAR(g[1], r1 * 1.5, 1e-14);
    EXPECT_NEAR(g[2], r0 * -0.5, 1e-14);
    EXPECT_NEAR(g[3], r1 * -0.5, 1e-14);
    EXPECT_NEAR(g[4], r0, 1e-14);
    EXPECT_NEAR(g[5], r1, 1e-14);
}

TEST(Mlp, ZeroLossGradientGivesZeroGradient) {
    Mlp net({4, 8, 8, 2});
    Rng rng(1);
    net.init_uniform(rng);
    Matrix x = Matrix::Random(4, 3);
    ForwardCache cache;
    net.forward(x, cache);
    EXPECT_EQ(net.backward(cache, Matrix::Zero(2, 3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
    Rng rng(2024);
    for (Activation act : {Activation::Relu, Activation::Tanh}) {
        for (int probe = 0; probe < 10; ++probe) {
            const int in = 1 + static_cast<int>(rng.below(12));
            const int h = 1 + static_cast<int>(rng.below(24));
            Mlp net({in, h, h, 1 + static_cast<int>(rng.below(3))}, act);
            net.init_uniform(rng);
            const auto r = flexsac::testing::check_gradients(net, rng, 3);
            EXPECT_LT(r.max_rel_error, 1e-4) << "probe " << probe;
        }
    }
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
    Rng rng(9);
    Mlp net({5, 7, 7, 1}, Activation::Tanh);
    net.init_uniform(rng);
    Matrix x = Matrix::Random(5, 1);
    ForwardCache cache;
    net.forward(x, cache);
    Vector g;
    Matrix dx;
    net.backward(cache, Matrix::Ones(1, 1), &g, &dx);
    for (int i = 0; i < 5; ++i) {
        Matrix xp = x, xm = x;
        xp(i, 0) += 1e-5;
        xm(i, 0) -= 1e-5;
        const double fd = (net.predict(xp)(0, 0) - net.predict(xm)(0, 0)) / 2e-5;
        EXPECT_NEAR(dx(i, 0), fd, 1e-8);
    }
}

TEST(Mlp, RepeatedPassesAreBitIdentical) {
    Rng rng(4);
    Mlp net({6, 16, 16, 2});
    net.init_uniform(rng);
    const Matrix x = Matrix::Random(6, 32);
    const Matrix d = Matrix::Random(2, 32);
    ForwardCache c1, c2;
    const Matrix y1 = net.forward(x, c1);
    const Matrix y2 = net.forward(x, c2);
    EXPECT_TRUE(y1 == y2);
    EXPECT_TRUE(net.backward(c1, d) == net.backward(c2, d));
}

TEST(Mlp, CheckpointRoundTrip) {
    Rng rng(5);
    Mlp net({3, 9, 9, 2}, Activation::Tanh);
    net.init_uniform(rng);
    std::stringstream buf;
    write_mlp(buf, net);
    const Mlp back = read_mlp(buf);
    EXPECT_EQ(back.sizes(), net.sizes());
    EXPECT_EQ(back.activation(), net.activation());
    EXPECT_TRUE(back.params() == net.params());
}

TEST(Mlp, CheckpointTruncationDetected) {
    Rng rng(5);
    Mlp net({3, 9, 2});
    net.init_uniform(rng);
    std::stringstream buf;
    write_mlp(buf, net);
    std::string s = buf.str();
    s.resize(s.size() - 5);
    std::istringstream in(s);
    EXPECT_THROW(read_mlp(in), CheckpointError);
}

TEST(Mlp, CheckpointWidthMismatchDetected) {
    MlpF net({3, 4, 1});
    std::stringstream buf;
    write_mlp(buf, net);
    EXPECT_THROW(read_mlp<double>(buf), CheckpointError);
}

TEST(Adam, ZeroGradientLeavesParams) {
    Vector p = Vector::LinSpaced(5, -1.0, 1.0);
    const Vector p0 = p;
    AdamState s(5);
    ASSERT_TRUE(adam_step(p, Vector(Vector::Zero(5)), s, 1e-3));
    EXPECT_TRUE(p == p0);
    EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepIsLrTimesSign) {
    Vector p(3);
    p << 0.0, 1.0, -2.0;
    Vector g(3);
    g << 0.5, -3.0, 1e-3;
    AdamState s(3);
    adam_step(p, g, s, 1e-3);
    // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
    EXPECT_NEAR(p[0], -1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
    EXPECT_NEAR(p[1], 1.0 + 1e-3 * 3.0 / (3.0 + 1e-8), 1e-15);
    EXPECT_NEAR(p[2], -2.0 - 1e-3 * 1e-3 / (1e-3 + 1e-8), 1e-15);
}

TEST(Adam, ConstantGradientMatchesScalarIteration) {
    Vector p = Vector::Zero(1);
    const Vector g = Vector::Constant(1, -0.2);
    AdamState s(1);
    double m = 0.0, v = 0.0, x = 0.0;
    for (int t = 1; t <= 500; ++t) {
        const double before = p[0];
        adam_step(p, g, s, 1e-3);
        m = 0.9 * m + 0.1 * -0.2;
        v = 0.999 * v + 0.001 * 0.04;
        x -= 1e-3 * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
        EXPECT_NEAR(p[0], x, 1e-12);
        EXPECT_NEAR(p[0] - before, 1e-3, 1e-6);  // lr * sign(-g)
    }
    EXPECT_EQ(s.step, 500);
}

TEST(Adam, NonFiniteGradientRejected) {
    Vector p = Vector::Ones(2);
    Vector g(2);
    g << 1.0, std::numeric_limits<double>::infinity();
    AdamState s(2);
    EXPECT_FALSE(adam_step(p, g, s, 1e-3));
    EXPECT_TRUE(p == Vector::Ones(2));
    EXPECT_EQ(s.step, 0);
}

TEST(Squash, MeanZeroDeterministicIsHalf) {
    const auto o = sample_squashed_gaussian(0.0, 0.3, nullptr);
    EXPECT_EQ(o.sampled_action, 0.5);
    EXPECT_EQ(squash(0.0), 0.5);
}

TEST(Squash, EqualsShiftedTanh) {
    for (double u = -8.0; u <= 8.0; u += 0.01) EXPECT_NEAR(squash(u), 0.5 * (std::tanh(u) + 1.0), 1e-15);
}

TEST(Squash, DegenerateVarianceLimit) {
    Rng rng(3);
    const auto o = sample_squashed_gaussian(0.4, -1e9, &rng);
    EXPECT_EQ(o.log_std, kLogStdMin);
    EXPECT_TRUE(o.log_std_clamped);
    EXPECT_NEAR(o.sampled_action, squash(0.4), 1e-7);
    EXPECT_GT(o.log_prob, 15.0);
}

TEST(Squash, LogStdUpperClamp) {
    const auto o = sample_squashed_gaussian(0.0, 9.0, nullptr);
    EXPECT_EQ(o.log_std, kLogStdMax);
}

TEST(Squash, ActionsStrictlyInsideAndLogProbFinite) {
    Rng rng(8);
    for (int i = 0; i < 200000; ++i) {
        const double mean = rng.uniform(-30.0, 30.0);
        const double ls = rng.uniform(-25.0, 4.0);
        const auto o = sample_squashed_gaussian(mean, ls, &rng);
        ASSERT_GT(o.sampled_action, 0.0);
        ASSERT_LT(o.sampled_action, 1.0);
        ASSERT_TRUE(std::isfinite(o.log_prob));
    }
}

// Log density from the change of variables a = (tanh(u) + 1) / 2 evaluated
// directly, without the softplus rewrite.
TEST(Squash, LogProbMatchesChangeOfVariables) {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double mean = rng.uniform(-2.0, 2.0);
        const double ls = rng.uniform(-3.0, 1.0);
        const auto o = sample_squashed_gaussian(mean, ls, &rng);
        const double sd = std::exp(ls);
        const double z = (o.pre_squash - mean) / sd;
        const double log_normal = -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
        const double da_du = 0.5 * (1.0 - std::tanh(o.pre_squash) * std::tanh(o.pre_squash));
        EXPECT_NEAR(o.log_prob, log_normal - std::log(da_du), 1e-8 * std::max(1.0, std::abs(o.log_prob)));
    }
}

TEST(Squash, DensityIntegratesToOne) {
    for (auto [mean, ls] : {std::pair{0.0, 0.0}, {0.7, -1.0}, {-1.2, 0.5}, {0.1, -2.5}}) {
        // Composite Simpson on u over +-12 sd, mapped through a = squash(u).
        const double sd = std::exp(ls);
        const double lo = mean - 12.0 * sd;
        const double hi = mean + 12.0 * sd;
        const int n = 20000;
        const double step = (hi - lo) / n;
        double total = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double u = lo + i * step;
            const double a = squash(u);
            const double da_du = 0.5 * (1.0 - std::tanh(u) * std::tanh(u));
            // Far tails round to the interval ends; their mass is negligible.
            if (a <= 0.0 || a >= 1.0 || da_du <= 0.0) continue;
            const double f = squashed_gaussian_density(a, mean, ls) * da_du;
            if (!std::isfinite(f)) continue;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            total += w * f;
        }
        total *= step / 3.0;
        EXPECT_NEAR(total, 1.0, 1e-2) << mean << " " << ls;
    }
}

// Below the width where the squash starts piling mass at the ends.
TEST(Squash, EntropyIncreasesWithLogStd) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double ls = -3.0; ls <= -0.5; ls += 0.5) {
        Rng rng(77);
        double h = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) h -= sample_squashed_gaussian(0.2, ls, &rng).log_prob;
        h /= n;
        EXPECT_GT(h, prev) << ls;
        prev = h;
    }
}
