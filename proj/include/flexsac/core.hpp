#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "flexsac/errors.hpp"

namespace flexsac {

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

/// SAC training hyperparameters. Defaults follow the reference training
/// table (learning rate 1e-3, tau 3e-3, buffer 2e6, minibatch 2048, update
/// every 96 simulation steps, 64 hidden units) and the best Pareto cell
/// (gamma 0.99, alpha 0.05, lambda 100).
struct HyperParams {
    double gamma = 0.99;
    double alpha = 0.05;
    double lambda_comfort = 100.0;
    double beta = 1e-5;
    double learning_rate = 1e-3;
    double tau = 3e-3;
    std::int64_t buffer_capacity = 2'000'000;
    std::int64_t minibatch_size = 2048;
    std::int64_t update_interval_sim_steps = 96;
    std::int64_t gradient_steps_per_update = 1;
    std::int64_t hidden_size = 64;
    std::int64_t warmup_random_control_steps = 168;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (!(lambda_comfort >= 0.0)) throw ConfigError("lambda_comfort must be >= 0");
        if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
        if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
        if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
        if (minibatch_size > buffer_capacity) throw ConfigError("minibatch_size must not exceed buffer_capacity");
        if (update_interval_sim_steps < 1) throw ConfigError("update_interval_sim_steps must be >= 1");
        if (gradient_steps_per_update < 1) throw ConfigError("gradient_steps_per_update must be >= 1");
        if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
        if (warmup_random_control_steps < 0) throw ConfigError("warmup_random_control_steps must be >= 0");
    }

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// ---------------------------------------------------------------------------
// Min-max normalization
// ---------------------------------------------------------------------------

struct NormalizationSpec {
    double min = 0.0;
    double max = 1.0;

    void validate() const {
        if (!(max > min)) throw ConfigError("normalization max must exceed min");
    }

    friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

/// Maps `value` onto [0, 1]; out-of-range values clamp.
inline double normalize(double value, const NormalizationSpec& spec) {
    spec.validate();
    return std::clamp((value - spec.min) / (spec.max - spec.min), 0.0, 1.0);
}

// Cooling setpoint actuation range.
inline constexpr double kSetpointMin = 21.0;
inline constexpr double kSetpointMax = 28.0;

/// Normalized policy output -> cooling setpoint in degC.
inline double denormalize_action(double a) {
    return kSetpointMin + (kSetpointMax - kSetpointMin) * std::clamp(a, 0.0, 1.0);
}

inline double setpoint_to_action(double setpoint_c) {
    return std::clamp((setpoint_c - kSetpointMin) / (kSetpointMax - kSetpointMin), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Deterministic random streams
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Seeded 64-bit Mersenne Twister. Named sub-streams ("env", "policy",
/// "buffer", ...) are derived by hashing the label into the seed, so
/// components never share a stream.
class Rng {
public:
    using result_type = std::mt19937_64::result_type;

    explicit Rng(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

    static Rng substream(std::uint64_t seed, std::string_view label) {
        return Rng(detail::splitmix64(seed) ^ detail::fnv1a64(label));
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        double u;
        do {
            u = std::generate_canonical<double, 64>(engine_);
        } while (u <= 0.0 || u >= 1.0);
        return u;
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    double normal() { return normal_(engine_); }

    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace flexsac
