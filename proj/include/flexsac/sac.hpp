#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "flexsac/core.hpp"
#include "flexsac/env.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/nn.hpp"

namespace flexsac {

struct Transition {
    Observation state;
    double action = 0.5;  // normalized, (0, 1)
    double reward = 0.0;
    Observation next_state;
    bool done = false;
};

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

/// Fixed-capacity FIFO ring of transitions. Storage grows on demand up to
/// the capacity, then the oldest slot is overwritten.
class ReplayBuffer {
public:
    ReplayBuffer(std::int64_t capacity, std::size_t state_dim) : capacity_(capacity), dim_(state_dim) {
        if (capacity < 1) throw ConfigError("replay capacity must be >= 1");
    }

    std::int64_t capacity() const noexcept { return capacity_; }
    std::int64_t size() const noexcept { return size_; }
    std::size_t state_dim() const noexcept { return dim_; }

    void push(const Transition& t) {
        if (t.state.size() != dim_ || t.next_state.size() != dim_) {
            throw ShapeError("transition state length " + std::to_string(t.state.size()) + " != buffer dimension " +
                             std::to_string(dim_));
        }
        const auto slot = static_cast<std::size_t>(cursor_);
        if (size_ < capacity_ && static_cast<std::size_t>(size_) == actions_.size()) {
            states_.insert(states_.end(), t.state.begin(), t.state.end());
            next_states_.insert(next_states_.end(), t.next_state.begin(), t.next_state.end());
            actions_.push_back(t.action);
            rewards_.push_back(t.reward);
            dones_.push_back(t.done ? 1.0 : 0.0);
        } else {
            std::copy(t.state.begin(), t.state.end(), states_.begin() + slot * dim_);
            std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + slot * dim_);
            actions_[slot] = t.action;
            rewards_[slot] = t.reward;
            dones_[slot] = t.done ? 1.0 : 0.0;
        }
        cursor_ = (cursor_ + 1) % capacity_;
        size_ = std::min(size_ + 1, capacity_);
    }

    /// Transition in storage slot `slot` (0 <= slot < size()).
    Transition at(std::int64_t slot) const {
        if (slot < 0 || slot >= size_) throw ShapeError("replay slot out of range");
        const auto s = static_cast<std::size_t>(slot);
        Transition t;
        t.state.assign(states_.begin() + s * dim_, states_.begin() + (s + 1) * dim_);
        t.next_state.assign(next_states_.begin() + s * dim_, next_states_.begin() + (s + 1) * dim_);
        t.action = actions_[s];
        t.reward = rewards_[s];
        t.done = dones_[s] != 0.0;
        return t;
    }

    /// Oldest-first position -> storage slot.
    std::int64_t slot_of_age(std::int64_t i) const {
        const std::int64_t oldest = size_ < capacity_ ? 0 : cursor_;
        return (oldest + i) % capacity_;
    }

    /// k distinct slots drawn uniformly (Floyd's algorithm).
    std::vector<std::int64_t> sample_slots(std::int64_t k, Rng& rng) const {
        if (k > size_) throw StateError("minibatch larger than the replay buffer");
        std::vector<std::int64_t> out;
        out.reserve(static_cast<std::size_t>(k));
        std::unordered_set<std::int64_t> seen;
        seen.reserve(static_cast<std::size_t>(k) * 2);
        for (std::int64_t j = size_ - k; j < size_; ++j) {
            const auto t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j) + 1));
            const std::int64_t pick = seen.contains(t) ? j : t;
            seen.insert(pick);
            out.push_back(pick);
        }
        return out;
    }

    template <typename T = double>
    struct Batch {
        nn::MatrixT<T> states;
        nn::MatrixT<T> next_states;
        Eigen::Matrix<T, 1, Eigen::Dynamic> actions;
        nn::VectorT<T> rewards;
        nn::VectorT<T> dones;
    };

    template <typename T = double>
    Batch<T> gather(std::span<const std::int64_t> slots) const {
        const auto n = static_cast<Eigen::Index>(slots.size());
        const auto d = static_cast<Eigen::Index>(dim_);
        Batch<T> b{nn::MatrixT<T>(d, n), nn::MatrixT<T>(d, n), Eigen::Matrix<T, 1, Eigen::Dynamic>(n),
                   nn::VectorT<T>(n), nn::VectorT<T>(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(slots[static_cast<std::size_t>(i)]);
            for (Eigen::Index k = 0; k < d; ++k) {
                b.states(k, i) = static_cast<T>(states_[s * dim_ + static_cast<std::size_t>(k)]);
                b.next_states(k, i) = static_cast<T>(next_states_[s * dim_ + static_cast<std::size_t>(k)]);
            }
            b.actions[i] = static_cast<T>(actions_[s]);
            b.rewards[i] = static_cast<T>(rewards_[s]);
            b.dones[i] = static_cast<T>(dones_[s]);
        }
        return b;
    }

private:
    std::int64_t capacity_;
    std::size_t dim_;
    std::int64_t cursor_ = 0;
    std::int64_t size_ = 0;
    std::vector<double> states_;
    std::vector<double> next_states_;
    std::vector<double> actions_;
    std::vector<double> rewards_;
    std::vector<double> dones_;
};

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

enum class ActionMode { Stochastic, Deterministic };

struct LossReport {
    std::int64_t update = 0;
    double q1_loss = 0.0;
    double q2_loss = 0.0;
    double policy_loss = 0.0;
    double entropy = 0.0;
    bool applied = true;
};

inline constexpr const char* kLossCsvHeader = "step,q1_loss,q2_loss,policy_loss,entropy";

/// Rolls Polyak averaging into `target`: target <- tau * online + (1 - tau) * target.
template <typename T>
void polyak_update(nn::BasicMlp<T>& target, const nn::BasicMlp<T>& online, double tau) {
    if (target.parameter_count() != online.parameter_count()) throw ShapeError("target/online size mismatch");
    if (tau == 1.0) {
        target.params() = online.params();
    } else {
        // Elementwise loop keeps the rounding of tau*o + (1-tau)*t fixed.
        const T t = static_cast<T>(tau);
        const T keep = T(1) - t;
        auto& p = target.params();
        const auto& o = online.params();
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = t * o[i] + keep * p[i];
    }
}

/// Soft actor-critic with a squashed-Gaussian policy, twin soft Q-networks,
/// Polyak-averaged targets and a fixed entropy temperature. The scalar type
/// sets network and optimizer precision; rewards, observations and the
/// policy head arithmetic stay in double.
template <typename T>
class BasicSacAgent {
public:
    using Scalar = T;
    using Net = nn::BasicMlp<T>;
    using Mat = nn::MatrixT<T>;
    using Vec = nn::VectorT<T>;
    using Adam = nn::BasicAdamState<T>;
    using Cache = nn::BasicForwardCache<T>;
    using Batch = ReplayBuffer::Batch<T>;

    /// Consecutive non-finite updates tolerated before training is aborted.
    static constexpr int kMaxNonFiniteUpdates = 5;

    BasicSacAgent(const HyperParams& hp, std::size_t state_dim, nn::Activation act = nn::Activation::Relu)
        : hp_(hp),
          dim_(state_dim),
          buffer_(hp.buffer_capacity, state_dim),
          rng_policy_(Rng::substream(hp.seed, "policy")),
          rng_buffer_(Rng::substream(hp.seed, "buffer")),
          rng_warmup_(Rng::substream(hp.seed, "warmup")) {
        hp_.validate();
        if (state_dim < 1) throw ShapeError("state dimension must be >= 1");
        const int h = static_cast<int>(hp.hidden_size);
        const int d = static_cast<int>(state_dim);
        policy_ = Net({d, h, h, 2}, act);
        q1_ = Net({d + 1, h, h, 1}, act);
        q2_ = Net({d + 1, h, h, 1}, act);
        Rng init = Rng::substream(hp.seed, "init");
        policy_.init_uniform(init);
        q1_.init_uniform(init);
        q2_.init_uniform(init);
        q1_target_ = q1_;
        q2_target_ = q2_;
        opt_policy_ = Adam(policy_.parameter_count());
        opt_q1_ = Adam(q1_.parameter_count());
        opt_q2_ = Adam(q2_.parameter_count());
    }

    const HyperParams& hyperparams() const noexcept { return hp_; }
    std::size_t state_dim() const noexcept { return dim_; }
    const ReplayBuffer& buffer() const noexcept { return buffer_; }
    std::int64_t env_step_counter() const noexcept { return env_steps_; }
    std::int64_t transitions_seen() const noexcept { return transitions_; }
    std::int64_t updates_done() const noexcept { return updates_; }
    bool in_warmup() const noexcept { return transitions_ < hp_.warmup_random_control_steps; }

    const Net& policy() const noexcept { return policy_; }
    const Net& q1() const noexcept { return q1_; }
    const Net& q2() const noexcept { return q2_; }
    const Net& q1_target() const noexcept { return q1_target_; }
    const Net& q2_target() const noexcept { return q2_target_; }
    Net& policy() noexcept { return policy_; }
    Net& q1() noexcept { return q1_; }
    Net& q2() noexcept { return q2_; }

    /// Raw policy head (mean, log_std) for one observation.
    std::pair<double, double> policy_head(std::span<const double> obs) const {
        check_obs(obs);
        const Vec out = policy_.predict_one(obs);
        return {static_cast<double>(out[0]), static_cast<double>(out[1])};
    }

    /// Normalized action in (0, 1). Stochastic mode draws uniformly while the
    /// buffer is being prefilled; deterministic mode returns squash(mean).
    double select_action(std::span<const double> obs, ActionMode mode) {
        check_obs(obs);
        if (mode == ActionMode::Stochastic && in_warmup()) return rng_warmup_.uniform_open();
        const auto [mean, log_std] = policy_head(obs);
        if (mode == ActionMode::Deterministic) return nn::squash(mean);
        return nn::sample_squashed_gaussian(mean, log_std, &rng_policy_).sampled_action;
    }

    /// Deterministic action without touching any random stream.
    double act_deterministic(std::span<const double> obs) const {
        check_obs(obs);
        return nn::squash(static_cast<double>(policy_.predict_one(obs)[0]));
    }

    /// Stores a transition covering `sim_steps` simulation steps and runs
    /// gradient_steps_per_update updates for every update boundary crossed,
    /// provided the buffer holds at least one minibatch.
    std::vector<LossReport> observe(const Transition& t, std::int64_t sim_steps = 1) {
        buffer_.push(t);
        ++transitions_;
        const std::int64_t before = env_steps_;
        env_steps_ += sim_steps;
        const std::int64_t triggers =
            env_steps_ / hp_.update_interval_sim_steps - before / hp_.update_interval_sim_steps;
        std::vector<LossReport> reports;
        if (triggers <= 0 || buffer_.size() < hp_.minibatch_size) return reports;
        for (std::int64_t i = 0; i < triggers * hp_.gradient_steps_per_update; ++i) reports.push_back(update());
        return reports;
    }

    /// One gradient step on both critics, the actor, then the targets.
    LossReport update() {
        if (buffer_.size() < hp_.minibatch_size) throw StateError("update() needs a full minibatch in the buffer");
        const auto slots = buffer_.sample_slots(hp_.minibatch_size, rng_buffer_);
        const Batch batch = buffer_.gather<T>(slots);
        return update_on(batch);
    }

    /// Gradient step on an explicit batch (exposed for tests).
    LossReport update_on(const Batch& b) {
        const Eigen::Index n = b.states.cols();
        const auto d = static_cast<Eigen::Index>(dim_);
        const T inv_n = T(1) / static_cast<T>(n);
        const T alpha = static_cast<T>(hp_.alpha);
        const T gamma = static_cast<T>(hp_.gamma);
        LossReport rep;
        rep.update = updates_ + 1;

        // Soft Bellman target with a fresh next action from the current policy.
        const Mat head_next = policy_.predict(b.next_states);
        Mat x_next(d + 1, n);
        x_next.topRows(d) = b.next_states;
        Vec logp_next(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto s = nn::sample_squashed_gaussian(static_cast<double>(head_next(0, i)), static_cast<double>(head_next(1, i)), &rng_policy_);
            x_next(d, i) = static_cast<T>(s.sampled_action);
            logp_next[i] = static_cast<T>(s.log_prob);
        }
        const Mat q1_next = q1_target_.predict(x_next);
        const Mat q2_next = q2_target_.predict(x_next);
        Vec y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const T soft_v = std::min(q1_next(0, i), q2_next(0, i)) - alpha * logp_next[i];
            y[i] = b.rewards[i] + gamma * (T(1) - b.dones[i]) * soft_v;
        }

        // Critic regression.
        Mat x(d + 1, n);
        x.topRows(d) = b.states;
        x.row(d) = b.actions;
        Cache c1;
        Cache c2;
        const Mat q1_out = q1_.forward(x, c1);
        const Mat q2_out = q2_.forward(x, c2);
        const Mat diff1 = q1_out - y.transpose();
        const Mat diff2 = q2_out - y.transpose();
        rep.q1_loss = static_cast<double>(diff1.squaredNorm() * inv_n);
        rep.q2_loss = static_cast<double>(diff2.squaredNorm() * inv_n);
        Vec g1;
        Vec g2;
        q1_.backward(c1, T(2) * inv_n * diff1, &g1);
        q2_.backward(c2, T(2) * inv_n * diff2, &g2);

        const Vec q1_before = q1_.params();
        const Vec q2_before = q2_.params();
        const Adam o1_before = opt_q1_;
        const Adam o2_before = opt_q2_;
        auto rollback = [&] {
            q1_.params() = q1_before;
            q2_.params() = q2_before;
            opt_q1_ = o1_before;
            opt_q2_ = o2_before;
        };
        if (!std::isfinite(rep.q1_loss) || !std::isfinite(rep.q2_loss) || !nn::adam_step(q1_.params(), g1, opt_q1_, hp_.learning_rate) ||
            !nn::adam_step(q2_.params(), g2, opt_q2_, hp_.learning_rate)) {
            rollback();
            return reject(rep);
        }

        // Actor: minimize E[alpha log pi(a|s) - min Q(s, a)], a reparameterized.
        Cache cp;
        const Mat head = policy_.forward(b.states, cp);
        Mat x_pi(d + 1, n);
        x_pi.topRows(d) = b.states;
        std::vector<nn::GaussianPolicyOutput> samples(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            samples[static_cast<std::size_t>(i)] = nn::sample_squashed_gaussian(static_cast<double>(head(0, i)), static_cast<double>(head(1, i)), &rng_policy_);
            x_pi(d, i) = static_cast<T>(samples[static_cast<std::size_t>(i)].sampled_action);
        }
        Cache cq1;
        Cache cq2;
        const Mat q1_pi = q1_.forward(x_pi, cq1);
        const Mat q2_pi = q2_.forward(x_pi, cq2);
        Mat dx1;
        Mat dx2;
        const Mat ones = Mat::Ones(1, n);
        q1_.backward(cq1, ones, nullptr, &dx1);
        q2_.backward(cq2, ones, nullptr, &dx2);

        Mat d_head(2, n);
        const double inv_nd = 1.0 / static_cast<double>(n);
        double policy_loss = 0.0;
        double entropy = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            const bool first = q1_pi(0, i) <= q2_pi(0, i);
            const double q_min = static_cast<double>(first ? q1_pi(0, i) : q2_pi(0, i));
            const double dq_da = static_cast<double>(first ? dx1(d, i) : dx2(d, i));
            const double th = std::tanh(s.pre_squash);
            const double da_du = 0.5 * (1.0 - th * th);
            const double sigma_eps = std::exp(s.log_std) * s.noise;
            policy_loss += hp_.alpha * s.log_prob - q_min;
            entropy -= s.log_prob;
            // d log pi / du = 2 tanh(u) through the squash correction; d log pi / d log_std also has -1.
            d_head(0, i) = static_cast<T>(inv_nd * (hp_.alpha * 2.0 * th - dq_da * da_du));
            d_head(1, i) = s.log_std_clamped ? T(0)
                                             : static_cast<T>(inv_nd * (hp_.alpha * (-1.0 + 2.0 * th * sigma_eps) -
                                                                        dq_da * da_du * sigma_eps));
        }
        rep.policy_loss = policy_loss * inv_nd;
        rep.entropy = entropy * inv_nd;
        Vec gp;
        policy_.backward(cp, d_head, &gp);
        const Adam op_before = opt_policy_;
        const Vec p_before = policy_.params();
        if (!std::isfinite(rep.policy_loss) || !nn::adam_step(policy_.params(), gp, opt_policy_, hp_.learning_rate)) {
            policy_.params() = p_before;
            opt_policy_ = op_before;
            rollback();
            return reject(rep);
        }
        if (!policy_.all_finite() || !q1_.all_finite() || !q2_.all_finite()) {
            policy_.params() = p_before;
            opt_policy_ = op_before;
            rollback();
            return reject(rep);
        }

        polyak_update(q1_target_, q1_, hp_.tau);
        polyak_update(q2_target_, q2_, hp_.tau);
        ++updates_;
        consecutive_failures_ = 0;
        return rep;
    }

    // -----------------------------------------------------------------------
    // Checkpoint
    //
    //   8 bytes  "FLXSACK\0"
    //   u32      format version (1)
    //   u8       network scalar width (4 or 8)
    //   u64      state dimension
    //   hyperparameters: gamma alpha lambda beta lr tau (f64),
    //            buffer minibatch interval grad_steps hidden warmup (i64), seed (u64)
    //   i64 x3   env steps, transitions seen, updates done
    //   5 networks (policy, q1, q2, q1_target, q2_target) in Mlp layout
    //   3 Adam states (policy, q1, q2)
    //   u32      end marker "END!"
    //
    // The replay buffer and random-stream positions are not stored.
    // -----------------------------------------------------------------------

    static constexpr std::uint32_t kCheckpointVersion = 1;

    void save_checkpoint(std::ostream& out) const {
        out.write("FLXSACK", 8);
        nn::detail::write_pod(out, kCheckpointVersion);
        nn::detail::write_pod(out, static_cast<std::uint8_t>(sizeof(T)));
        nn::detail::write_pod(out, static_cast<std::uint64_t>(dim_));
        for (double v : {hp_.gamma, hp_.alpha, hp_.lambda_comfort, hp_.beta, hp_.learning_rate, hp_.tau}) {
            nn::detail::write_pod(out, v);
        }
        for (std::int64_t v : {hp_.buffer_capacity, hp_.minibatch_size, hp_.update_interval_sim_steps,
                               hp_.gradient_steps_per_update, hp_.hidden_size, hp_.warmup_random_control_steps}) {
            nn::detail::write_pod(out, v);
        }
        nn::detail::write_pod(out, hp_.seed);
        nn::detail::write_pod(out, env_steps_);
        nn::detail::write_pod(out, transitions_);
        nn::detail::write_pod(out, updates_);
        for (const Net* net : {&policy_, &q1_, &q2_, &q1_target_, &q2_target_}) nn::write_mlp(out, *net);
        for (const Adam* s : {&opt_policy_, &opt_q1_, &opt_q2_}) nn::write_adam(out, *s);
        nn::detail::write_pod(out, kEndMarker);
    }

    void save_checkpoint(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
        save_checkpoint(out);
        if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
    }

    static BasicSacAgent load_checkpoint(std::istream& in) {
        char magic[8] = {};
        in.read(magic, 8);
        if (!in || std::memcmp(magic, "FLXSACK", 8) != 0) throw CheckpointError("not a SAC checkpoint");
        const auto version = nn::detail::read_pod<std::uint32_t>(in);
        if (version != kCheckpointVersion) {
            throw CheckpointError("checkpoint version " + std::to_string(version) + " not supported");
        }
        if (nn::detail::read_pod<std::uint8_t>(in) != sizeof(T)) {
            throw CheckpointError("checkpoint network precision does not match this agent type");
        }
        const auto dim = nn::detail::read_pod<std::uint64_t>(in);
        if (dim < 1 || dim > 4096) throw CheckpointError("implausible state dimension in checkpoint");
        HyperParams hp;
        for (double* v : {&hp.gamma, &hp.alpha, &hp.lambda_comfort, &hp.beta, &hp.learning_rate, &hp.tau}) {
            *v = nn::detail::read_pod<double>(in);
        }
        for (std::int64_t* v : {&hp.buffer_capacity, &hp.minibatch_size, &hp.update_interval_sim_steps,
                                &hp.gradient_steps_per_update, &hp.hidden_size, &hp.warmup_random_control_steps}) {
            *v = nn::detail::read_pod<std::int64_t>(in);
        }
        hp.seed = nn::detail::read_pod<std::uint64_t>(in);
        try {
            hp.validate();
        } catch (const ConfigError& e) {
            throw CheckpointError(std::string("checkpoint hyperparameters invalid: ") + e.what());
        }
        BasicSacAgent agent(hp, static_cast<std::size_t>(dim));
        agent.env_steps_ = nn::detail::read_pod<std::int64_t>(in);
        agent.transitions_ = nn::detail::read_pod<std::int64_t>(in);
        agent.updates_ = nn::detail::read_pod<std::int64_t>(in);
        Net* nets[] = {&agent.policy_, &agent.q1_, &agent.q2_, &agent.q1_target_, &agent.q2_target_};
        for (Net* net : nets) {
            Net loaded = nn::read_mlp<T>(in);
            if (loaded.sizes() != net->sizes()) throw CheckpointError("network shape does not match checkpoint header");
            *net = std::move(loaded);
        }
        Adam* opts[] = {&agent.opt_policy_, &agent.opt_q1_, &agent.opt_q2_};
        const Net* owners[] = {&agent.policy_, &agent.q1_, &agent.q2_};
        for (int i = 0; i < 3; ++i) {
            Adam s = nn::read_adam<T>(in);
            if (s.m.size() != owners[i]->parameter_count()) throw CheckpointError("optimizer size mismatch");
            *opts[i] = std::move(s);
        }
        if (nn::detail::read_pod<std::uint32_t>(in) != kEndMarker) throw CheckpointError("missing end marker");
        return agent;
    }

    static BasicSacAgent load_checkpoint(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
        return load_checkpoint(in);
    }

    const Adam& policy_optimizer() const noexcept { return opt_policy_; }
    const Adam& q1_optimizer() const noexcept { return opt_q1_; }
    const Adam& q2_optimizer() const noexcept { return opt_q2_; }

private:
    static constexpr std::uint32_t kEndMarker = 0x21444e45;  // "END!"

    void check_obs(std::span<const double> obs) const {
        if (obs.size() != dim_) {
            throw ShapeError("observation length " + std::to_string(obs.size()) + " != agent state dimension " +
                             std::to_string(dim_));
        }
    }

    LossReport reject(LossReport rep) {
        rep.applied = false;
        if (++consecutive_failures_ >= kMaxNonFiniteUpdates) {
            throw RunFailure("training diverged: " + std::to_string(consecutive_failures_) +
                             " consecutive non-finite updates (q1_loss=" + std::to_string(rep.q1_loss) +
                             ", q2_loss=" + std::to_string(rep.q2_loss) +
                             ", policy_loss=" + std::to_string(rep.policy_loss) + ")");
        }
        return rep;
    }

    HyperParams hp_;
    std::size_t dim_;
    Net policy_;
    Net q1_;
    Net q2_;
    Net q1_target_;
    Net q2_target_;
    Adam opt_policy_;
    Adam opt_q1_;
    Adam opt_q2_;
    ReplayBuffer buffer_;
    Rng rng_policy_;
    Rng rng_buffer_;
    Rng rng_warmup_;
    std::int64_t env_steps_ = 0;
    std::int64_t transitions_ = 0;
    std::int64_t updates_ = 0;
    int consecutive_failures_ = 0;
};

/// Training uses single-precision networks; the double instantiation backs
/// exact-arithmetic checks.
using SacAgent = BasicSacAgent<float>;
using SacAgentD = BasicSacAgent<double>;

}  // namespace flexsac
