#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "flexsac/config.hpp"
#include "flexsac/env.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/reward.hpp"
#include "flexsac/sac.hpp"
#include "flexsac/traces.hpp"

namespace flexsac {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Traces and hashing
// ---------------------------------------------------------------------------

/// Trace file named in the config, or the synthetic generator's output.
inline TraceSet load_run_traces(const RunConfig& cfg) {
    if (!cfg.trace_path.empty()) {
        TraceSet t = load_traces(cfg.trace_path);
        if (t.step_minutes() != cfg.sim_step_minutes) {
            throw TraceError("trace cadence " + std::to_string(t.step_minutes()) + " min does not match sim step");
        }
        return t;
    }
    return generate_synthetic_traces(cfg.synthetic_params());
}

/// Git blob id: SHA-1 over "blob <size>\0<content>".
inline std::string git_blob_hash(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw RunFailure("cannot allocate a digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw RunFailure("SHA-1 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

inline std::string trace_hash(const TraceSet& traces) { return git_blob_hash(traces_to_csv(traces)); }

// ---------------------------------------------------------------------------
// Running controllers
// ---------------------------------------------------------------------------

using SetpointPolicy = std::function<double(Minutes t, const Observation& obs)>;

/// Runs `policy` over [start, end), one decision per control step.
inline EpisodeReport run_controller(BuildingEnv& env, const RunConfig& cfg, Minutes start, Minutes end,
                                    const SetpointPolicy& policy) {
    Observation obs = env.reset(start, end);
    std::vector<StepResult> steps;
    steps.reserve(static_cast<std::size_t>((end - start) / cfg.sim_step_minutes));
    while (!env.done()) {
        const double sp = policy(env.state().sim_clock, obs);
        auto res = env.step(sp, cfg.hold_steps());
        obs = res.back().observation;
        for (auto& r : res) steps.push_back(std::move(r));
    }
    return episode_report(steps, cfg.reward_weights(),
                          static_cast<std::size_t>((end - start) / cfg.sim_step_minutes));
}

inline EpisodeReport rbc_report(const RunConfig& cfg, const TraceSet& traces, Minutes start, Minutes end) {
    BuildingEnv env(cfg.env_config(), traces);
    const RbcParams rbc = cfg.env_config().rbc;
    return run_controller(env, cfg, start, end, [&rbc](Minutes t, const Observation&) { return rbc_policy(t, rbc); });
}

/// Deploys a trained agent. Deterministic mode uses the squashed mean;
/// stochastic mode samples from a copy of the agent so the caller's random
/// streams stay untouched.
inline EpisodeReport agent_report(const SacAgent& agent, const RunConfig& cfg, const TraceSet& traces, Minutes start,
                                  Minutes end) {
    BuildingEnv env(cfg.env_config(), traces);
    if (env.observation_size() != agent.state_dim()) {
        throw ShapeError("agent expects " + std::to_string(agent.state_dim()) + " features, state-space set " +
                         std::to_string(static_cast<int>(cfg.state_space_set)) + " provides " +
                         std::to_string(env.observation_size()));
    }
    if (cfg.deployment_mode == DeploymentMode::Deterministic) {
        return run_controller(env, cfg, start, end, [&agent](Minutes, const Observation& obs) {
            return denormalize_action(agent.act_deterministic(obs));
        });
    }
    SacAgent sampler = agent;
    return run_controller(env, cfg, start, end, [&sampler](Minutes, const Observation& obs) {
        return denormalize_action(sampler.select_action(obs, ActionMode::Stochastic));
    });
}

/// Agent vs reference controller over one window.
struct Comparison {
    EpisodeReport drl;
    EpisodeReport rbc;
    PctChange energy;
    PctChange cost;
    PctChange discomfort;
};

inline Comparison compare(EpisodeReport drl, EpisodeReport rbc) {
    Comparison c{std::move(drl), std::move(rbc), {}, {}, {}};
    c.energy = pct_change(c.drl.energy_purchased_mwh, c.rbc.energy_purchased_mwh);
    c.cost = pct_change_cost(c.drl.energy_cost, c.rbc.energy_cost);
    c.discomfort = pct_change_discomfort(c.drl.discomfort_degree_hours, c.rbc.discomfort_degree_hours);
    return c;
}

inline Comparison evaluate_agent(const SacAgent& agent, const RunConfig& cfg, const TraceSet& traces, Minutes start,
                                 Minutes end) {
    return compare(agent_report(agent, cfg, traces, start, end), rbc_report(cfg, traces, start, end));
}

// ---------------------------------------------------------------------------
// Pre-cooling signature
// ---------------------------------------------------------------------------

/// Four-hour blocks of the day by mean price over a window. Among equally
/// cheap blocks the one ending closest before the expensive block is taken;
/// among equally expensive blocks the earliest.
struct PriceBlocks {
    int low_start_hour = 0;
    int high_start_hour = 0;
    double low_mean_price = 0.0;
    double high_mean_price = 0.0;
};

inline PriceBlocks find_price_blocks(const TraceSet& traces, Minutes start, Minutes end) {
    std::array<double, 24> sum{};
    std::array<int, 24> count{};
    for (Minutes t = start; t < end; t += traces.step_minutes()) {
        const int h = hour_of_day(t);
        sum[static_cast<std::size_t>(h)] += traces.at(t).price_per_kwh;
        ++count[static_cast<std::size_t>(h)];
    }
    std::array<double, 24> hourly{};
    for (int h = 0; h < 24; ++h) {
        if (count[static_cast<std::size_t>(h)] == 0) throw TraceError("price window does not cover every hour");
        hourly[static_cast<std::size_t>(h)] = sum[static_cast<std::size_t>(h)] / count[static_cast<std::size_t>(h)];
    }
    std::array<double, 21> block{};
    for (int s = 0; s <= 20; ++s) {
        for (int k = 0; k < 4; ++k) block[static_cast<std::size_t>(s)] += hourly[static_cast<std::size_t>(s + k)] / 4.0;
    }
    constexpr double eps = 1e-12;
    PriceBlocks p;
    p.high_start_hour = 0;
    for (int s = 1; s <= 20; ++s) {
        if (block[static_cast<std::size_t>(s)] > block[static_cast<std::size_t>(p.high_start_hour)] + eps) {
            p.high_start_hour = s;
        }
    }
    const double low = *std::min_element(block.begin(), block.end());
    int best = -1;
    for (int s = 0; s <= 20; ++s) {
        if (block[static_cast<std::size_t>(s)] > low + eps) continue;
        if (s + 4 <= p.high_start_hour) {
            best = s;  // latest cheap block that ends before the expensive one
        } else if (best < 0 || best + 4 > p.high_start_hour) {
            best = std::max(best, s);
        }
    }
    p.low_start_hour = best;
    p.low_mean_price = block[static_cast<std::size_t>(p.low_start_hour)];
    p.high_mean_price = block[static_cast<std::size_t>(p.high_start_hour)];
    return p;
}

struct PrecoolSignature {
    PriceBlocks blocks;
    double low_block_setpoint = 0.0;
    double high_block_setpoint = 0.0;
    double difference = 0.0;  // high minus low
};

inline PrecoolSignature precool_signature(const EpisodeReport& rep, const PriceBlocks& blocks) {
    double lo = 0.0;
    double hi = 0.0;
    int nlo = 0;
    int nhi = 0;
    for (const TraceRecord& r : rep.trace) {
        const int h = hour_of_day(r.timestamp);
        if (h >= blocks.low_start_hour && h < blocks.low_start_hour + 4) {
            lo += r.setpoint;
            ++nlo;
        }
        if (h >= blocks.high_start_hour && h < blocks.high_start_hour + 4) {
            hi += r.setpoint;
            ++nhi;
        }
    }
    if (nlo == 0 || nhi == 0) throw StateError("evaluation trace does not cover both price blocks");
    PrecoolSignature s{blocks, lo / nlo, hi / nhi, 0.0};
    s.difference = s.high_block_setpoint - s.low_block_setpoint;
    return s;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpisodeLogRow {
    int episode = 0;
    double reward_total = 0.0;
    double reward_cost = 0.0;
    double reward_comfort = 0.0;
};

inline constexpr const char* kEpisodeCsvHeader = "episode,reward_total,reward_cost,reward_comfort";

struct TrainResult {
    SacAgent agent;
    std::vector<EpisodeLogRow> episodes;
    std::vector<LossReport> losses;
    std::optional<EpisodeReport> first_episode;  // summary of training episode 1 (no trace)
};

using EpisodeCallback = std::function<void(const EpisodeLogRow&, const EpisodeReport&, const SacAgent&)>;

/// Trains a fresh agent for cfg.episodes passes over the training span.
/// Every control step stores one transition whose reward is summed over the
/// held sim steps; done is set on the final control step only.
inline TrainResult train_agent(const RunConfig& cfg, const TraceSet& traces, const EpisodeCallback& on_episode = {}) {
    cfg.validate();
    BuildingEnv env(cfg.env_config(), traces);
    TrainResult out{SacAgent(cfg.hyperparams, env.observation_size(), cfg.activation), {}, {}, std::nullopt};
    SacAgent& agent = out.agent;
    const RewardWeights weights = cfg.reward_weights();
    const auto expected = static_cast<std::size_t>((cfg.episode_end - cfg.episode_start) / cfg.sim_step_minutes);

    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        Observation obs = env.reset(cfg.episode_start, cfg.episode_end);
        std::vector<StepResult> steps;
        steps.reserve(expected);
        while (!env.done()) {
            const double action = agent.select_action(obs, ActionMode::Stochastic);
            auto res = env.step(denormalize_action(action), cfg.hold_steps());
            double reward = 0.0;
            for (const StepResult& s : res) reward += step_reward(s, weights).total;
            Transition tr{obs, action, reward, res.back().observation, res.back().done};
            for (LossReport& l : agent.observe(tr, static_cast<std::int64_t>(res.size()))) {
                if (l.applied) out.losses.push_back(l);
            }
            obs = std::move(tr.next_state);
            for (auto& r : res) steps.push_back(std::move(r));
        }
        EpisodeReport rep = episode_report(steps, weights, expected);
        rep.trace.clear();
        rep.trace.shrink_to_fit();
        const EpisodeLogRow row{ep, rep.reward_total, rep.reward_cost, rep.reward_comfort};
        out.episodes.push_back(row);
        if (ep == 1) out.first_episode = rep;
        if (on_episode) on_episode(row, rep, agent);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw RunFailure("cannot write '" + p.string() + "'");
    return out;
}

inline std::string pct_field(const PctChange& c) { return c.percent ? format_double(*c.percent) : "undefined"; }

}  // namespace detail

inline void write_episode_csv(std::ostream& out, const std::vector<EpisodeLogRow>& rows) {
    out << kEpisodeCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.episode << ',' << detail::format_double(r.reward_total) << ',' << detail::format_double(r.reward_cost)
            << ',' << detail::format_double(r.reward_comfort) << '\n';
    }
}

inline void write_loss_csv(std::ostream& out, const std::vector<LossReport>& rows) {
    out << kLossCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.update << ',' << detail::format_double(r.q1_loss) << ',' << detail::format_double(r.q2_loss) << ','
            << detail::format_double(r.policy_loss) << ',' << detail::format_double(r.entropy) << '\n';
    }
}

inline constexpr const char* kDeltaHeader = "metric,drl,rbc,pct_change";

inline void write_delta_csv(std::ostream& out, const Comparison& c) {
    out << kDeltaHeader << '\n';
    out << "energy_purchased_mwh," << detail::format_double(c.energy.value) << ','
        << detail::format_double(c.energy.reference) << ',' << detail::pct_field(c.energy) << '\n';
    out << "energy_cost," << detail::format_double(c.cost.value) << ',' << detail::format_double(c.cost.reference)
        << ',' << detail::pct_field(c.cost) << '\n';
    out << "discomfort_degree_hours," << detail::format_double(c.discomfort.value) << ','
        << detail::format_double(c.discomfort.reference) << ',' << detail::pct_field(c.discomfort) << '\n';
}

/// Writes summary, per-step traces and deltas with a file-name prefix.
inline void write_comparison(const fs::path& dir, const std::string& prefix, const Comparison& c) {
    {
        auto out = detail::open_out(dir / (prefix + "_summary.csv"));
        out << kSummaryHeader << '\n';
        write_summary_row(out, "drl", c.drl);
        write_summary_row(out, "rbc", c.rbc);
    }
    {
        auto out = detail::open_out(dir / (prefix + "_trace_drl.csv"));
        write_trace_csv(out, c.drl);
    }
    {
        auto out = detail::open_out(dir / (prefix + "_trace_rbc.csv"));
        write_trace_csv(out, c.rbc);
    }
    auto out = detail::open_out(dir / (prefix + "_delta.csv"));
    write_delta_csv(out, c);
}

/// Reads back a delta file: metric -> (drl, rbc, percent or empty).
struct DeltaRow {
    double drl = 0.0;
    double rbc = 0.0;
    std::optional<double> percent;
};

inline std::map<std::string, DeltaRow> read_delta_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw RunFailure("missing run artifact '" + p.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != kDeltaHeader) throw RunFailure("unexpected header in '" + p.string() + "'");
    std::map<std::string, DeltaRow> rows;
    while (std::getline(in, line)) {
        const auto f = detail::split_csv(line);
        if (f.size() != 4) throw RunFailure("malformed row in '" + p.string() + "'");
        DeltaRow r;
        r.drl = detail::parse_double(f[1], 0);
        r.rbc = detail::parse_double(f[2], 0);
        if (f[3] != "undefined") r.percent = detail::parse_double(f[3], 0);
        rows[std::string(f[0])] = r;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Single run: train, evaluate, persist
// ---------------------------------------------------------------------------

struct RunOutcome {
    fs::path dir;
    Comparison test;
    std::optional<Comparison> in_training;  // first training episode vs RBC over the training span
    PrecoolSignature precool;
};

/// Writes the reproducibility header of a run directory.
inline void write_run_header(const fs::path& dir, const RunConfig& cfg, const TraceSet& traces) {
    fs::create_directories(dir);
    save_config((dir / "config.ini").string(), cfg);
    {
        auto out = detail::open_out(dir / "seed.txt");
        out << cfg.hyperparams.seed << '\n';
    }
    auto out = detail::open_out(dir / "trace_hash.txt");
    out << trace_hash(traces) << '\n';
}

/// Full train + evaluate job. With `in_training_report` the first training
/// episode is also replayed against the reference controller.
inline RunOutcome run_training_job(const RunConfig& cfg, const TraceSet& traces, const fs::path& dir,
                                   bool in_training_report = false, const EpisodeCallback& on_episode = {}) {
    write_run_header(dir, cfg, traces);
    TrainResult tr = train_agent(cfg, traces, on_episode);
    {
        auto out = detail::open_out(dir / "episodes.csv");
        write_episode_csv(out, tr.episodes);
    }
    {
        auto out = detail::open_out(dir / "losses.csv");
        write_loss_csv(out, tr.losses);
    }
    tr.agent.save_checkpoint((dir / "checkpoint.bin").string());

    RunOutcome o{dir, evaluate_agent(tr.agent, cfg, traces, cfg.eval_start, cfg.eval_end), std::nullopt, {}};
    write_comparison(dir, "eval", o.test);
    o.precool = precool_signature(o.test.drl, find_price_blocks(traces, cfg.eval_start, cfg.eval_end));
    {
        auto out = detail::open_out(dir / "precool.csv");
        out << "low_block_start_hour,high_block_start_hour,low_block_setpoint,high_block_setpoint,difference\n"
            << o.precool.blocks.low_start_hour << ',' << o.precool.blocks.high_start_hour << ','
            << detail::format_double(o.precool.low_block_setpoint) << ','
            << detail::format_double(o.precool.high_block_setpoint) << ','
            << detail::format_double(o.precool.difference) << '\n';
    }
    if (in_training_report && tr.first_episode) {
        o.in_training = compare(*tr.first_episode, rbc_report(cfg, traces, cfg.episode_start, cfg.episode_end));
        auto out = detail::open_out(dir / "in_training_delta.csv");
        write_delta_csv(out, *o.in_training);
    }
    return o;
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

/// Runs job(i) for i in [0, n) on at most `jobs` threads. Jobs must not
/// share mutable state; an exception inside a job is reported through the
/// returned per-job messages (empty on success).
inline std::vector<std::string> run_pool(std::size_t n, int jobs, const std::function<void(std::size_t)>& job) {
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown failure";
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
        return errors;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return errors;
}

inline void write_failure(const fs::path& dir, const std::string& message) {
    fs::create_directories(dir);
    auto out = detail::open_out(dir / "FAILED.txt");
    out << message << '\n';
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep
// ---------------------------------------------------------------------------

struct SweepSpec {
    std::string experiment = "sweep";
    std::vector<double> gammas{0.99, 0.95, 0.9};
    std::vector<double> alphas{0.05, 0.2};
    std::vector<double> lambdas{100.0, 500.0, 1000.0};
    std::vector<std::uint64_t> seeds{0, 1, 2};
};

struct SweepCell {
    std::string name;
    double gamma = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
};

inline std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
    std::vector<SweepCell> cells;
    for (double g : spec.gammas) {
        for (double a : spec.alphas) {
            for (double l : spec.lambdas) {
                cells.push_back({"g" + detail::format_double(g) + "_a" + detail::format_double(a) + "_l" +
                                     detail::format_double(l),
                                 g, a, l});
            }
        }
    }
    return cells;
}

struct ParetoPoint {
    SweepCell cell;
    int runs_ok = 0;
    int runs_failed = 0;
    double cost_change_pct = std::nan("");
    double discomfort_change_pct = std::nan("");
    double energy_change_pct = std::nan("");
    double energy_cost = std::nan("");
    double discomfort_degree_hours = std::nan("");
    bool on_front = false;
    bool flagged = false;  // at least one run failed or no run produced results
};

inline constexpr const char* kParetoHeader =
    "cell,gamma,alpha,lambda,runs_ok,runs_failed,cost_change_pct,discomfort_change_pct,energy_change_pct,"
    "energy_cost,discomfort_degree_hours,on_front,flagged";

namespace detail {

inline std::string nan_field(double v) { return std::isnan(v) ? "" : format_double(v); }

/// Marks points not dominated in (cost change, discomfort change), both minimized.
inline void mark_front(std::vector<ParetoPoint>& pts) {
    for (auto& p : pts) {
        if (p.runs_ok == 0 || std::isnan(p.cost_change_pct) || std::isnan(p.discomfort_change_pct)) continue;
        p.on_front = true;
        for (const auto& q : pts) {
            if (&q == &p || q.runs_ok == 0 || std::isnan(q.cost_change_pct) || std::isnan(q.discomfort_change_pct)) {
                continue;
            }
            const bool no_worse = q.cost_change_pct <= p.cost_change_pct && q.discomfort_change_pct <= p.discomfort_change_pct;
            const bool better = q.cost_change_pct < p.cost_change_pct || q.discomfort_change_pct < p.discomfort_change_pct;
            if (no_worse && better) {
                p.on_front = false;
                break;
            }
        }
    }
}

/// Mean of per-run percentages; undefined percentages count as missing.
inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace detail

inline fs::path run_dir(const fs::path& root, const std::string& experiment, const std::string& cell,
                        std::uint64_t seed) {
    return root / experiment / cell / std::to_string(seed);
}

/// Trains every grid cell for every seed, then aggregates per-cell means
/// from the run directories.
inline std::vector<ParetoPoint> run_sweep(const RunConfig& base, const TraceSet& traces, const SweepSpec& spec,
                                          const fs::path& root, int jobs) {
    const auto cells = sweep_cells(spec);
    struct Job {
        std::size_t cell;
        std::uint64_t seed;
    };
    std::vector<Job> queue;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::uint64_t s : spec.seeds) queue.push_back({c, s});
    }
    const auto errors = run_pool(queue.size(), jobs, [&](std::size_t i) {
        const Job& j = queue[i];
        RunConfig cfg = base;
        cfg.hyperparams.gamma = cells[j.cell].gamma;
        cfg.hyperparams.alpha = cells[j.cell].alpha;
        cfg.hyperparams.lambda_comfort = cells[j.cell].lambda;
        cfg.hyperparams.seed = j.seed;
        const fs::path dir = run_dir(root, spec.experiment, cells[j.cell].name, j.seed);
        try {
            run_training_job(cfg, traces, dir);
        } catch (const std::exception& e) {
            write_failure(dir, e.what());
            throw;
        }
    });

    std::vector<ParetoPoint> points;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        ParetoPoint p;
        p.cell = cells[c];
        std::vector<double> cost_pct, disc_pct, energy_pct, cost, disc;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            if (queue[i].cell != c) continue;
            if (!errors[i].empty()) {
                ++p.runs_failed;
                continue;
            }
            const auto rows = read_delta_csv(run_dir(root, spec.experiment, cells[c].name, queue[i].seed) / "eval_delta.csv");
            ++p.runs_ok;
            const DeltaRow& rc = rows.at("energy_cost");
            const DeltaRow& rd = rows.at("discomfort_degree_hours");
            const DeltaRow& re = rows.at("energy_purchased_mwh");
            if (rc.percent) cost_pct.push_back(*rc.percent);
            if (rd.percent) disc_pct.push_back(*rd.percent);
            if (re.percent) energy_pct.push_back(*re.percent);
            cost.push_back(rc.drl);
            disc.push_back(rd.drl);
        }
        p.cost_change_pct = detail::mean_of(cost_pct);
        p.discomfort_change_pct = detail::mean_of(disc_pct);
        p.energy_change_pct = detail::mean_of(energy_pct);
        p.energy_cost = detail::mean_of(cost);
        p.discomfort_degree_hours = detail::mean_of(disc);
        p.flagged = p.runs_failed > 0 || p.runs_ok == 0;
        points.push_back(p);
    }
    detail::mark_front(points);

    const fs::path exp_dir = root / spec.experiment;
    fs::create_directories(exp_dir);
    {
        auto out = detail::open_out(exp_dir / "pareto.csv");
        out << kParetoHeader << '\n';
        for (const auto& p : points) {
            out << p.cell.name << ',' << detail::format_double(p.cell.gamma) << ','
                << detail::format_double(p.cell.alpha) << ',' << detail::format_double(p.cell.lambda) << ','
                << p.runs_ok << ',' << p.runs_failed << ',' << detail::nan_field(p.cost_change_pct) << ','
                << detail::nan_field(p.discomfort_change_pct) << ',' << detail::nan_field(p.energy_change_pct) << ','
                << detail::nan_field(p.energy_cost) << ',' << detail::nan_field(p.discomfort_degree_hours) << ','
                << (p.on_front ? 1 : 0) << ',' << (p.flagged ? 1 : 0) << '\n';
        }
    }
    auto plot = detail::open_out(exp_dir / "pareto_plot_data.csv");
    plot << "cell,seed,cost_change_pct,discomfort_change_pct,status\n";
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const auto& cell = cells[queue[i].cell];
        if (!errors[i].empty()) {
            plot << cell.name << ',' << queue[i].seed << ",,,failed\n";
            continue;
        }
        const auto rows = read_delta_csv(run_dir(root, spec.experiment, cell.name, queue[i].seed) / "eval_delta.csv");
        const auto& rc = rows.at("energy_cost");
        const auto& rd = rows.at("discomfort_degree_hours");
        plot << cell.name << ',' << queue[i].seed << ',' << (rc.percent ? detail::format_double(*rc.percent) : "")
             << ',' << (rd.percent ? detail::format_double(*rd.percent) : "") << ",ok\n";
    }
    return points;
}

// ---------------------------------------------------------------------------
// Robustness grid
// ---------------------------------------------------------------------------

struct RobustnessSpec {
    std::string experiment = "robustness";
    std::vector<int> episodes{1, 2, 5, 10, 50};
    std::vector<std::int64_t> update_intervals{4, 96, 672};
    std::vector<std::uint64_t> seeds{0};
    double exclusion_threshold_pct = 150.0;
};

struct RobustnessRow {
    std::string cell;
    int episodes = 0;
    std::int64_t update_interval = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::optional<Comparison> in_training;
    std::optional<Comparison> test;
    bool excluded = false;
};

inline constexpr const char* kRobustnessHeader =
    "cell,episodes,update_interval,seed,status,train_cost_change_pct,train_discomfort_change_pct,"
    "test_cost_change_pct,test_discomfort_change_pct,test_discomfort_degree_hours,rbc_discomfort_degree_hours,excluded";

/// A run is excluded when its test-week discomfort rises by more than the
/// threshold; with a zero-discomfort reference any discomfort counts as an
/// unbounded rise.
inline bool exceeds_discomfort_threshold(const PctChange& c, double threshold_pct) {
    if (c.percent) return *c.percent > threshold_pct;
    return c.value > 0.0;
}

inline std::vector<RobustnessRow> run_robustness(const RunConfig& base, const TraceSet& traces,
                                                 const RobustnessSpec& spec, const fs::path& root, int jobs) {
    std::vector<RobustnessRow> rows;
    for (int e : spec.episodes) {
        for (std::int64_t u : spec.update_intervals) {
            for (std::uint64_t s : spec.seeds) {
                RobustnessRow r;
                r.cell = "ep" + std::to_string(e) + "_upd" + std::to_string(u);
                r.episodes = e;
                r.update_interval = u;
                r.seed = s;
                rows.push_back(std::move(r));
            }
        }
    }
    const auto errors = run_pool(rows.size(), jobs, [&](std::size_t i) {
        RobustnessRow& r = rows[i];
        RunConfig cfg = base;
        cfg.episodes = r.episodes;
        cfg.hyperparams.update_interval_sim_steps = r.update_interval;
        cfg.hyperparams.seed = r.seed;
        const fs::path dir = run_dir(root, spec.experiment, r.cell, r.seed);
        try {
            RunOutcome o = run_training_job(cfg, traces, dir, true);
            r.test = std::move(o.test);
            r.in_training = std::move(o.in_training);
        } catch (const std::exception& ex) {
            write_failure(dir, ex.what());
            throw;
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].ok = errors[i].empty();
        rows[i].error = errors[i];
        if (rows[i].ok) rows[i].excluded = exceeds_discomfort_threshold(rows[i].test->discomfort, spec.exclusion_threshold_pct);
    }
    const fs::path exp_dir = root / spec.experiment;
    fs::create_directories(exp_dir);
    auto out = detail::open_out(exp_dir / "robustness.csv");
    out << kRobustnessHeader << '\n';
    auto pct = [](const std::optional<Comparison>& c, bool cost) -> std::string {
        if (!c) return "";
        const PctChange& p = cost ? c->cost : c->discomfort;
        return detail::pct_field(p);
    };
    for (const auto& r : rows) {
        out << r.cell << ',' << r.episodes << ',' << r.update_interval << ',' << r.seed << ','
            << (r.ok ? "ok" : "failed") << ',' << pct(r.in_training, true) << ',' << pct(r.in_training, false) << ','
            << pct(r.test, true) << ',' << pct(r.test, false) << ','
            << (r.test ? detail::format_double(r.test->drl.discomfort_degree_hours) : "") << ','
            << (r.test ? detail::format_double(r.test->rbc.discomfort_degree_hours) : "") << ','
            << (r.excluded ? 1 : 0) << '\n';
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Transfer
// ---------------------------------------------------------------------------

struct TransferTarget {
    std::string tag;
    RunConfig config;  // traces and evaluation window of the target
};

/// Same building and schedule on another climate's synthetic traces; the
/// plant is re-sized for that climate.
inline TransferTarget climate_target(const RunConfig& base, int zone) {
    TransferTarget t{"climate-" + std::to_string(zone) + "-" + climate_profile(zone).name, base};
    t.config.trace_path.clear();
    t.config.synthetic.climate_zone = zone;
    return t;
}

/// Transition-season work week (default: first full work week of September).
inline TransferTarget season_target(const RunConfig& base, Minutes start = make_time(2017, 9, 4),
                                    Minutes end = make_time(2017, 9, 9)) {
    TransferTarget t{"transition season", base};
    t.config.eval_start = start;
    t.config.eval_end = end;
    return t;
}

struct TransferResult {
    std::string tag;
    Comparison comparison;
};

inline std::vector<TransferResult> run_transfer(const SacAgent& agent, const std::vector<TransferTarget>& targets,
                                                const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<TransferResult> results;
    for (const auto& t : targets) {
        const TraceSet traces = load_run_traces(t.config);
        Comparison c = evaluate_agent(agent, t.config, traces, t.config.eval_start, t.config.eval_end);
        std::string prefix = t.tag;
        std::replace(prefix.begin(), prefix.end(), ' ', '_');
        write_comparison(out_dir, prefix, c);
        results.push_back({t.tag, std::move(c)});
    }
    auto out = detail::open_out(out_dir / "transfer.csv");
    out << "target,drl_energy_mwh,rbc_energy_mwh,drl_cost,rbc_cost,drl_discomfort,rbc_discomfort,"
           "energy_change_pct,cost_change_pct,discomfort_change_pct\n";
    for (const auto& r : results) {
        const Comparison& c = r.comparison;
        out << r.tag << ',' << detail::format_double(c.drl.energy_purchased_mwh) << ','
            << detail::format_double(c.rbc.energy_purchased_mwh) << ',' << detail::format_double(c.drl.energy_cost)
            << ',' << detail::format_double(c.rbc.energy_cost) << ','
            << detail::format_double(c.drl.discomfort_degree_hours) << ','
            << detail::format_double(c.rbc.discomfort_degree_hours) << ',' << detail::pct_field(c.energy) << ','
            << detail::pct_field(c.cost) << ',' << detail::pct_field(c.discomfort) << '\n';
    }
    return results;
}

}  // namespace flexsac
