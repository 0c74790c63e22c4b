// Command-line front end: train, evaluate, sweep, robustness, transfer,
// gen-traces. Exit codes: 0 ok, 2 config error, 3 trace error, 4 run failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flexsac/harness.hpp"

namespace {

using namespace flexsac;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> state_set;
    std::string out = "runs";
    int jobs = 1;
    std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_jobs) {
    cmd->add_option("--config", o.config_path, "INI run configuration (defaults apply when omitted)");
    cmd->add_option("--seed", o.seed, "Override sac.seed");
    cmd->add_option("--set", o.state_set, "State-space set (1, 2 or 3)");
    cmd->add_option("--out", o.out, "Output root directory")->capture_default_str();
    cmd->add_option("-D,--define", o.overrides, "Override any config key, e.g. -D sac.gamma=0.95");
    if (with_jobs) cmd->add_option("--jobs", o.jobs, "Concurrent runs")->capture_default_str();
}

RunConfig resolve_config(const CommonOptions& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) cfg.hyperparams.seed = *o.seed;
    if (o.state_set) cfg.state_space_set = state_space_from_int(*o.state_set);
    if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    cfg.validate();
    return cfg;
}

void print_comparison(const std::string& label, const Comparison& c) {
    std::printf("%s\n", label.c_str());
    std::printf("  %-24s %14s %14s %10s\n", "metric", "drl", "rbc", "change %");
    auto row = [](const char* name, const PctChange& p) {
        std::printf("  %-24s %14.4f %14.4f %10s\n", name, p.value, p.reference, format_pct(p).c_str());
    };
    row("energy purchased [MWh]", c.energy);
    row("energy cost", c.cost);
    row("discomfort [K h]", c.discomfort);
}

int cmd_train(const CommonOptions& o, const std::string& experiment) {
    const RunConfig cfg = resolve_config(o);
    const TraceSet traces = load_run_traces(cfg);
    const fs::path dir = run_dir(o.out, experiment, "default", cfg.hyperparams.seed);
    const RunOutcome out = run_training_job(cfg, traces, dir, true,
                                            [&cfg](const EpisodeLogRow& row, const EpisodeReport& rep, const SacAgent&) {
                                                std::printf("episode %d/%d reward %.2f cost %.2f discomfort %.3f\n",
                                                            row.episode, cfg.episodes, row.reward_total,
                                                            rep.energy_cost, rep.discomfort_degree_hours);
                                                std::fflush(stdout);
                                            });
    print_comparison("test window " + format_rfc3339(cfg.eval_start) + " .. " + format_rfc3339(cfg.eval_end),
                     out.test);
    std::printf("pre-cooling: %.3f degC (hours %d-%d vs %d-%d)\n", out.precool.difference,
                out.precool.blocks.low_start_hour, out.precool.blocks.low_start_hour + 4,
                out.precool.blocks.high_start_hour, out.precool.blocks.high_start_hour + 4);
    std::printf("run directory: %s\n", dir.string().c_str());
    return 0;
}

int cmd_evaluate(const CommonOptions& o, const std::string& checkpoint) {
    const RunConfig cfg = resolve_config(o);
    const TraceSet traces = load_run_traces(cfg);
    const SacAgent agent = SacAgent::load_checkpoint(checkpoint);
    const Comparison c = evaluate_agent(agent, cfg, traces, cfg.eval_start, cfg.eval_end);
    const fs::path dir(o.out);
    write_run_header(dir, cfg, traces);
    write_comparison(dir, "eval", c);
    print_comparison("evaluation " + format_rfc3339(cfg.eval_start) + " .. " + format_rfc3339(cfg.eval_end), c);
    return 0;
}

int cmd_sweep(const CommonOptions& o, SweepSpec spec) {
    const RunConfig cfg = resolve_config(o);
    const TraceSet traces = load_run_traces(cfg);
    const auto points = run_sweep(cfg, traces, spec, o.out, o.jobs);
    int flagged = 0;
    for (const auto& p : points) {
        std::printf("%-24s ok %d failed %d cost %+.2f%% discomfort %s%s\n", p.cell.name.c_str(), p.runs_ok,
                    p.runs_failed, p.cost_change_pct,
                    std::isnan(p.discomfort_change_pct) ? "undefined" : std::to_string(p.discomfort_change_pct).c_str(),
                    p.on_front ? " *front" : "");
        flagged += p.flagged ? 1 : 0;
    }
    std::printf("%zu cells, %d flagged; table: %s\n", points.size(), flagged,
                (fs::path(o.out) / spec.experiment / "pareto.csv").string().c_str());
    return flagged == static_cast<int>(points.size()) ? 4 : 0;
}

int cmd_robustness(const CommonOptions& o, RobustnessSpec spec) {
    const RunConfig cfg = resolve_config(o);
    const TraceSet traces = load_run_traces(cfg);
    const auto rows = run_robustness(cfg, traces, spec, o.out, o.jobs);
    int failed = 0;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failed;
            std::printf("%-14s seed %llu FAILED: %s\n", r.cell.c_str(), static_cast<unsigned long long>(r.seed),
                        r.error.c_str());
            continue;
        }
        std::printf("%-14s seed %llu train cost %s%% test cost %s%% test discomfort %.3f K h%s\n", r.cell.c_str(),
                    static_cast<unsigned long long>(r.seed), format_pct(r.in_training->cost).c_str(),
                    format_pct(r.test->cost).c_str(), r.test->drl.discomfort_degree_hours,
                    r.excluded ? " (excluded)" : "");
    }
    return failed == static_cast<int>(rows.size()) ? 4 : 0;
}

int cmd_transfer(const CommonOptions& o, const std::string& checkpoint, const std::vector<int>& climates, bool all,
                 bool season) {
    const RunConfig cfg = resolve_config(o);
    const SacAgent agent = SacAgent::load_checkpoint(checkpoint);
    std::vector<TransferTarget> targets;
    std::vector<int> zones = climates;
    if (all) zones = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    for (int z : zones) targets.push_back(climate_target(cfg, z));
    if (season) targets.push_back(season_target(cfg));
    if (targets.empty()) throw ConfigError("transfer needs --climate, --all-climates or --season");
    for (const auto& r : run_transfer(agent, targets, o.out)) print_comparison(r.tag, r.comparison);
    return 0;
}

int cmd_gen_traces(const CommonOptions& o, const std::string& path, std::optional<int> climate,
                   std::optional<int> days) {
    RunConfig cfg = resolve_config(o);
    if (climate) cfg.synthetic.climate_zone = *climate;
    if (days) cfg.synthetic.days = *days;
    if (cfg.synthetic.days < 1) throw ConfigError("--days must be >= 1");
    const TraceSet traces = generate_synthetic_traces(cfg.synthetic_params());
    save_traces(path, traces);
    std::printf("%zu rows, %s .. %s, zone %d (%s), hash %s\n", traces.rows().size(),
                format_rfc3339(traces.start()).c_str(), format_rfc3339(traces.end()).c_str(),
                cfg.synthetic.climate_zone, climate_profile(cfg.synthetic.climate_zone).name,
                trace_hash(traces).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft actor-critic setpoint control for a building with thermal storage"};
    app.require_subcommand(1);

    CommonOptions train_o, eval_o, sweep_o, robust_o, transfer_o, gen_o;
    std::string experiment = "train";
    auto* train = app.add_subcommand("train", "Train an agent and evaluate it on the test week");
    add_common(train, train_o, false);
    train->add_option("--experiment", experiment, "Experiment name under the output root")->capture_default_str();

    std::string eval_checkpoint;
    auto* evaluate = app.add_subcommand("evaluate", "Deploy a checkpoint against the reference controller");
    add_common(evaluate, eval_o, false);
    evaluate->add_option("--checkpoint", eval_checkpoint, "Agent checkpoint")->required();

    SweepSpec sweep_spec;
    auto* sweep = app.add_subcommand("sweep", "Hyperparameter grid over gamma, alpha and lambda");
    add_common(sweep, sweep_o, true);
    sweep->add_option("--experiment", sweep_spec.experiment)->capture_default_str();
    sweep->add_option("--gammas", sweep_spec.gammas)->capture_default_str();
    sweep->add_option("--alphas", sweep_spec.alphas)->capture_default_str();
    sweep->add_option("--lambdas", sweep_spec.lambdas)->capture_default_str();
    sweep->add_option("--seeds", sweep_spec.seeds)->capture_default_str();

    RobustnessSpec robust_spec;
    auto* robust = app.add_subcommand("robustness", "Training-episode and update-interval grid");
    add_common(robust, robust_o, true);
    robust->add_option("--experiment", robust_spec.experiment)->capture_default_str();
    robust->add_option("--episodes", robust_spec.episodes)->capture_default_str();
    robust->add_option("--update-intervals", robust_spec.update_intervals)->capture_default_str();
    robust->add_option("--seeds", robust_spec.seeds)->capture_default_str();

    std::string transfer_checkpoint;
    std::vector<int> climates;
    bool all_climates = false;
    bool season = false;
    auto* transfer = app.add_subcommand("transfer", "Deploy a checkpoint on other climates or seasons");
    add_common(transfer, transfer_o, false);
    transfer->add_option("--checkpoint", transfer_checkpoint, "Agent checkpoint")->required();
    transfer->add_option("--climate", climates, "Climate zone 0-8 (repeatable)")->check(CLI::Range(0, 8));
    transfer->add_flag("--all-climates", all_climates, "All nine climate zones");
    transfer->add_flag("--season", season, "First work week of September on the run's traces");

    std::string trace_out;
    std::optional<int> gen_climate;
    std::optional<int> gen_days;
    auto* gen = app.add_subcommand("gen-traces", "Write synthetic weather, price and occupancy traces");
    add_common(gen, gen_o, false);
    gen->add_option("--file", trace_out, "Output CSV path")->required();
    gen->add_option("--climate", gen_climate, "Climate zone 0-8")->check(CLI::Range(0, 8));
    gen->add_option("--days", gen_days, "Number of days");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*train) return cmd_train(train_o, experiment);
        if (*evaluate) return cmd_evaluate(eval_o, eval_checkpoint);
        if (*sweep) return cmd_sweep(sweep_o, sweep_spec);
        if (*robust) return cmd_robustness(robust_o, robust_spec);
        if (*transfer) return cmd_transfer(transfer_o, transfer_checkpoint, climates, all_climates, season);
        if (*gen) return cmd_gen_traces(gen_o, trace_out, gen_climate, gen_days);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const TraceError& e) {
        std::fprintf(stderr, "trace error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failure: %s\n", e.what());
        return 4;
    }
    return 2;
}
