#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <type_traits>
#include <vector>

#include "flexsac/core.hpp"
#include "flexsac/errors.hpp"

namespace flexsac::nn {

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;  // features x batch, column per sample
template <typename T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;

enum class Activation : std::uint8_t { Relu = 0, Tanh = 1 };

/// Activations recorded by BasicMlp::forward for the matching backward pass.
template <typename T>
struct BasicForwardCache {
    std::vector<MatrixT<T>> inputs;  // input of each layer (post-activation of the previous)
    std::vector<MatrixT<T>> pre;     // pre-activation of each layer
    bool valid = false;
};

/// Dense feed-forward network with hidden activations and a linear output.
/// Parameters live in one flat vector; layer l stores its weight matrix
/// (fan_out x fan_in, column-major) followed by its bias.
template <typename T>
class BasicMlp {
public:
    using Scalar = T;
    using Matrix = MatrixT<T>;
    using Vector = VectorT<T>;
    using ForwardCache = BasicForwardCache<T>;

    BasicMlp() = default;

    explicit BasicMlp(std::vector<int> sizes, Activation act = Activation::Relu) : sizes_(std::move(sizes)), act_(act) {
        if (sizes_.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
        std::int64_t n = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ShapeError("layer sizes must be >= 1");
            offsets_.push_back(n);
            n += static_cast<std::int64_t>(sizes_[l] + 1) * sizes_[l + 1];
        }
        params_ = Vector::Zero(n);
    }

    /// Weights and biases ~ U(-gain/sqrt(fan_in), gain/sqrt(fan_in)).
    void init_uniform(Rng& rng, double gain = 1.0) {
        for (int l = 0; l < layer_count(); ++l) {
            const double bound = gain / std::sqrt(static_cast<double>(sizes_[l]));
            const std::int64_t begin = offsets_[l];
            const std::int64_t end = begin + static_cast<std::int64_t>(sizes_[l] + 1) * sizes_[l + 1];
            for (std::int64_t i = begin; i < end; ++i) params_[i] = static_cast<T>(rng.uniform(-bound, bound));
        }
    }

    int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    const std::vector<int>& sizes() const { return sizes_; }
    Activation activation() const { return act_; }
    std::int64_t parameter_count() const { return params_.size(); }

    Vector& params() { return params_; }
    const Vector& params() const { return params_; }

    Eigen::Map<const Matrix> weight(int l) const {
        return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
    }
    Eigen::Map<Matrix> weight(int l) { return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]}; }
    Eigen::Map<const Vector> bias(int l) const {
        return {params_.data() + offsets_[l] + static_cast<std::int64_t>(sizes_[l]) * sizes_[l + 1], sizes_[l + 1]};
    }

    Matrix forward(const Matrix& x, ForwardCache& cache) const {
        check_input(x);
        cache.inputs.resize(layer_count());
        cache.pre.resize(layer_count());
        cache.valid = false;
        cache.inputs[0] = x;
        for (int l = 0; l < layer_count(); ++l) {
            Matrix& z = cache.pre[l];
            z.noalias() = weight(l) * cache.inputs[l];
            z.colwise() += bias(l);
            if (l + 1 < layer_count()) cache.inputs[l + 1] = activate(z);
        }
        cache.valid = true;
        return cache.pre.back();
    }

    Matrix predict(const Matrix& x) const {
        check_input(x);
        Matrix a = x;
        for (int l = 0; l < layer_count(); ++l) {
            Matrix z = weight(l) * a;
            z.colwise() += bias(l);
            a = (l + 1 < layer_count()) ? activate(z) : std::move(z);
        }
        return a;
    }

    Vector predict_one(std::span<const double> x) const {
        const Eigen::Map<const MatrixT<double>> col(x.data(), static_cast<Eigen::Index>(x.size()), 1);
        if constexpr (std::is_same_v<T, double>) {
            return predict(col).col(0);
        } else {
            return predict(col.template cast<T>()).col(0);
        }
    }

    /// Reverse-mode pass for the scalar loss whose gradient with respect to
    /// the output is `d_out`. Writes the parameter gradient into `grad` and,
    /// when requested, the input gradient into `d_input`.
    void backward(const ForwardCache& cache, const Matrix& d_out, Vector* grad, Matrix* d_input = nullptr) const {
        if (!cache.valid) throw StateError("backward() without a matching forward() cache");
        if (d_out.rows() != output_size() || d_out.cols() != cache.inputs[0].cols()) {
            throw ShapeError("loss gradient shape does not match the forward batch");
        }
        if (grad) grad->setZero(parameter_count());
        Matrix delta = d_out;
        for (int l = layer_count() - 1; l >= 0; --l) {
            if (grad) {
                const std::int64_t off = offsets_[l];
                Eigen::Map<Matrix> gw(grad->data() + off, sizes_[l + 1], sizes_[l]);
                gw.noalias() = delta * cache.inputs[l].transpose();
                Eigen::Map<Vector>(grad->data() + off + static_cast<std::int64_t>(sizes_[l]) * sizes_[l + 1],
                                   sizes_[l + 1]) = delta.rowwise().sum();
            }
            if (l > 0 || d_input) {
                Matrix back = weight(l).transpose() * delta;
                if (l > 0) {
                    delta = back.cwiseProduct(activation_grad(cache.pre[l - 1]));
                } else {
                    *d_input = std::move(back);
                }
            }
        }
    }

    Vector backward(const ForwardCache& cache, const Matrix& d_out) const {
        Vector g;
        backward(cache, d_out, &g);
        return g;
    }

    bool all_finite() const { return params_.allFinite(); }

private:
    void check_input(const Matrix& x) const {
        if (sizes_.empty()) throw ShapeError("network has no layers");
        if (x.rows() != input_size()) {
            throw ShapeError("input has " + std::to_string(x.rows()) + " features, network expects " +
                             std::to_string(input_size()));
        }
        if (!x.allFinite()) throw ShapeError("input contains NaN or Inf");
    }

    Matrix activate(const Matrix& z) const {
        if (act_ == Activation::Tanh) return z.array().tanh().matrix();
        return z.cwiseMax(T(0));
    }

    Matrix activation_grad(const Matrix& z) const {
        if (act_ == Activation::Tanh) return (T(1) - z.array().tanh().square()).matrix();
        return (z.array() > T(0)).template cast<T>().matrix();
    }

    std::vector<int> sizes_;
    std::vector<std::int64_t> offsets_;
    Activation act_ = Activation::Relu;
    Vector params_;
};

using Mlp = BasicMlp<double>;
using MlpF = BasicMlp<float>;
using ForwardCache = BasicForwardCache<double>;

// ---------------------------------------------------------------------------
// Parameter checkpoint
//
//   u32 magic 'MLP2' | u32 layer-size count n | n x i32 sizes |
//   u8 activation | u8 scalar width (4 or 8) | u64 parameter count |
//   params as little-endian f32/f64
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CheckpointError("checkpoint truncated");
    return v;
}

}  // namespace detail

inline constexpr std::uint32_t kMlpMagic = 0x32504c4d;  // "MLP2"

template <typename T>
void write_mlp(std::ostream& out, const BasicMlp<T>& net) {
    detail::write_pod(out, kMlpMagic);
    detail::write_pod(out, static_cast<std::uint32_t>(net.sizes().size()));
    for (int s : net.sizes()) detail::write_pod(out, static_cast<std::int32_t>(s));
    detail::write_pod(out, static_cast<std::uint8_t>(net.activation()));
    detail::write_pod(out, static_cast<std::uint8_t>(sizeof(T)));
    detail::write_pod(out, static_cast<std::uint64_t>(net.parameter_count()));
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(net.parameter_count() * sizeof(T)));
}

template <typename T = double>
BasicMlp<T> read_mlp(std::istream& in) {
    if (detail::read_pod<std::uint32_t>(in) != kMlpMagic) throw CheckpointError("bad network magic");
    const auto n = detail::read_pod<std::uint32_t>(in);
    if (n < 2 || n > 64) throw CheckpointError("implausible layer count in checkpoint");
    std::vector<int> sizes;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto s = detail::read_pod<std::int32_t>(in);
        if (s < 1 || s > (1 << 20)) throw CheckpointError("implausible layer size in checkpoint");
        sizes.push_back(s);
    }
    const auto act = detail::read_pod<std::uint8_t>(in);
    if (act > 1) throw CheckpointError("unknown activation in checkpoint");
    if (detail::read_pod<std::uint8_t>(in) != sizeof(T)) throw CheckpointError("network scalar width mismatch");
    BasicMlp<T> net(sizes, static_cast<Activation>(act));
    if (detail::read_pod<std::uint64_t>(in) != static_cast<std::uint64_t>(net.parameter_count())) {
        throw CheckpointError("parameter count does not match layer sizes");
    }
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(net.parameter_count() * sizeof(T)));
    if (!in) throw CheckpointError("checkpoint truncated");
    return net;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename T>
struct BasicAdamState {
    VectorT<T> m;
    VectorT<T> v;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    BasicAdamState() = default;
    explicit BasicAdamState(std::int64_t n) : m(VectorT<T>::Zero(n)), v(VectorT<T>::Zero(n)) {}
};

using AdamState = BasicAdamState<double>;

/// Bias-corrected Adam update. Returns false (and leaves everything
/// untouched) when the gradient is not finite.
template <typename T>
bool adam_step(VectorT<T>& params, const VectorT<T>& grads, BasicAdamState<T>& s, double lr) {
    if (grads.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
        throw ShapeError("Adam: parameter, gradient and moment lengths differ");
    }
    if (!grads.allFinite()) return false;
    ++s.step;
    const T b1 = static_cast<T>(s.beta1);
    const T b2 = static_cast<T>(s.beta2);
    s.m = b1 * s.m + (T(1) - b1) * grads;
    s.v = b2 * s.v + (T(1) - b2) * grads.cwiseAbs2();
    const T c1 = static_cast<T>(1.0 - std::pow(s.beta1, static_cast<double>(s.step)));
    const T c2 = static_cast<T>(1.0 - std::pow(s.beta2, static_cast<double>(s.step)));
    params.array() -= static_cast<T>(lr) * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + static_cast<T>(s.eps));
    return true;
}

template <typename T>
void write_adam(std::ostream& out, const BasicAdamState<T>& s) {
    detail::write_pod(out, s.step);
    detail::write_pod(out, s.beta1);
    detail::write_pod(out, s.beta2);
    detail::write_pod(out, s.eps);
    detail::write_pod(out, static_cast<std::uint8_t>(sizeof(T)));
    detail::write_pod(out, static_cast<std::uint64_t>(s.m.size()));
    out.write(reinterpret_cast<const char*>(s.m.data()), static_cast<std::streamsize>(s.m.size() * sizeof(T)));
    out.write(reinterpret_cast<const char*>(s.v.data()), static_cast<std::streamsize>(s.v.size() * sizeof(T)));
}

template <typename T = double>
BasicAdamState<T> read_adam(std::istream& in) {
    BasicAdamState<T> s;
    s.step = detail::read_pod<std::int64_t>(in);
    s.beta1 = detail::read_pod<double>(in);
    s.beta2 = detail::read_pod<double>(in);
    s.eps = detail::read_pod<double>(in);
    if (detail::read_pod<std::uint8_t>(in) != sizeof(T)) throw CheckpointError("optimizer scalar width mismatch");
    const auto n = detail::read_pod<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 32)) throw CheckpointError("implausible optimizer size");
    s.m.resize(static_cast<Eigen::Index>(n));
    s.v.resize(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(s.m.data()), static_cast<std::streamsize>(n * sizeof(T)));
    in.read(reinterpret_cast<char*>(s.v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw CheckpointError("checkpoint truncated");
    return s;
}

// ---------------------------------------------------------------------------
// Squashed Gaussian policy head
//
// u ~ N(mean, exp(log_std)^2), action = (tanh(u) + 1) / 2 = sigmoid(2u).
// da/du = 2 sigmoid(2u) sigmoid(-2u), so
//   log pi(a) = log N(u) - log 2 + softplus(2u) + softplus(-2u).
// ---------------------------------------------------------------------------

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double squash(double u) {
    const double a = u >= 0.0 ? 1.0 / (1.0 + std::exp(-2.0 * u)) : std::exp(2.0 * u) / (1.0 + std::exp(2.0 * u));
    return std::clamp(a, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

/// log |da/du| of the squash map.
inline double log_squash_jacobian(double u) { return std::numbers::ln2 - softplus(2.0 * u) - softplus(-2.0 * u); }

struct GaussianPolicyOutput {
    double mean = 0.0;
    double log_std = 0.0;   // after clamping
    double noise = 0.0;     // standard-normal draw (0 in deterministic mode)
    double pre_squash = 0.0;
    double sampled_action = 0.5;
    double log_prob = 0.0;
    bool log_std_clamped = false;
};

/// Reparameterized sample. `rng == nullptr` selects deterministic mode,
/// which returns squash(mean).
inline GaussianPolicyOutput sample_squashed_gaussian(double mean, double log_std, Rng* rng) {
    GaussianPolicyOutput o;
    o.mean = mean;
    o.log_std = std::clamp(log_std, kLogStdMin, kLogStdMax);
    o.log_std_clamped = o.log_std != log_std;
    o.noise = rng ? rng->normal() : 0.0;
    const double stddev = std::exp(o.log_std);
    o.pre_squash = mean + stddev * o.noise;
    o.sampled_action = squash(o.pre_squash);
    constexpr double half_log_two_pi = 0.91893853320467274178;
    o.log_prob = -0.5 * o.noise * o.noise - o.log_std - half_log_two_pi - log_squash_jacobian(o.pre_squash);
    return o;
}

/// Density of the squashed distribution at action a in (0, 1).
inline double squashed_gaussian_density(double a, double mean, double log_std) {
    const double ls = std::clamp(log_std, kLogStdMin, kLogStdMax);
    const double u = std::atanh(2.0 * a - 1.0);
    const double z = (u - mean) / std::exp(ls);
    constexpr double half_log_two_pi = 0.91893853320467274178;
    return std::exp(-0.5 * z * z - ls - half_log_two_pi - log_squash_jacobian(u));
}

}  // namespace flexsac::nn
