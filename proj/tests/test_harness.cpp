#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "flexsac/config.hpp"
#include "flexsac/harness.hpp"

using namespace flexsac;
namespace fs = std::filesystem;

namespace {

// Five working days of training with a small network; a run takes a few seconds.
RunConfig tiny_config() {
    RunConfig cfg;
    cfg.episodes = 1;
    cfg.episode_start = make_time(2017, 6, 26);
    cfg.episode_end = make_time(2017, 7, 1);
    cfg.hyperparams.hidden_size = 16;
    cfg.hyperparams.minibatch_size = 32;
    cfg.hyperparams.buffer_capacity = 4096;
    cfg.hyperparams.warmup_random_control_steps = 24;
    cfg.hyperparams.update_interval_sim_steps = 96;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("flexsac_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

}  // namespace

TEST(GitBlob, KnownIds) {
    EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(PriceBlocks, SyntheticTwoTierPrices) {
    const RunConfig cfg;
    const TraceSet traces = load_run_traces(cfg);
    const PriceBlocks b = find_price_blocks(traces, cfg.eval_start, cfg.eval_end);
    EXPECT_EQ(b.high_start_hour, 8);  // earliest all-day-price block
    EXPECT_EQ(b.low_start_hour, 4);   // cheap block ending right at 08:00
    EXPECT_DOUBLE_EQ(b.low_mean_price, 0.04);
    EXPECT_DOUBLE_EQ(b.high_mean_price, 0.10);
}

TEST(PriceBlocks, AfternoonPeak) {
    RunConfig cfg;
    cfg.synthetic.day_price_start_hour = 14;
    cfg.synthetic.day_price_end_hour = 18;
    const TraceSet traces = load_run_traces(cfg);
    const PriceBlocks b = find_price_blocks(traces, cfg.eval_start, cfg.eval_end);
    EXPECT_EQ(b.high_start_hour, 14);
    EXPECT_EQ(b.low_start_hour, 10);
}

TEST(PriceBlocks, WindowMustCoverEveryHour) {
    const RunConfig cfg;
    const TraceSet traces = load_run_traces(cfg);
    EXPECT_THROW(find_price_blocks(traces, cfg.eval_start, cfg.eval_start + 600), TraceError);
}

TEST(Precool, BlockMeans) {
    EpisodeReport rep;
    for (Minutes t = make_time(2017, 7, 3); t < make_time(2017, 7, 4); t += 15) {
        TraceRecord r;
        r.timestamp = t;
        const int h = hour_of_day(t);
        r.setpoint = (h >= 4 && h < 8) ? 22.0 : 26.0;
        rep.trace.push_back(r);
    }
    const PriceBlocks blocks{4, 8, 0.04, 0.10};
    const PrecoolSignature s = precool_signature(rep, blocks);
    EXPECT_EQ(s.low_block_setpoint, 22.0);
    EXPECT_EQ(s.high_block_setpoint, 26.0);
    EXPECT_EQ(s.difference, 4.0);
    EXPECT_THROW(precool_signature(EpisodeReport{}, blocks), StateError);
}

TEST(Evaluate, ReferenceAgainstItselfIsZeroChange) {
    RunConfig cfg;
    cfg.building.sizing_factor = 0.5;  // undersized plant so the reference has discomfort
    const TraceSet traces = load_run_traces(cfg);
    const EpisodeReport rbc = rbc_report(cfg, traces, cfg.eval_start, cfg.eval_end);
    ASSERT_GT(rbc.discomfort_degree_hours, 0.0);
    const Comparison c = compare(rbc, rbc);
    ASSERT_TRUE(c.cost.percent && c.discomfort.percent && c.energy.percent);
    EXPECT_EQ(*c.cost.percent, 0.0);
    EXPECT_EQ(*c.discomfort.percent, 0.0);
    EXPECT_EQ(*c.energy.percent, 0.0);
}

TEST(Evaluate, WindowOutsideTraceIsTraceError) {
    RunConfig cfg;
    const TraceSet traces = load_run_traces(cfg);
    EXPECT_THROW(rbc_report(cfg, traces, make_time(2018, 1, 1), make_time(2018, 1, 6)), TraceError);
    SacAgent agent(cfg.hyperparams, observation_size(cfg.state_space_set));
    EXPECT_THROW(evaluate_agent(agent, cfg, traces, make_time(2016, 7, 4), make_time(2016, 7, 9)), TraceError);
}

TEST(Evaluate, StateSetMismatchIsShapeError) {
    RunConfig cfg;
    const TraceSet traces = load_run_traces(cfg);
    SacAgent agent(cfg.hyperparams, observation_size(StateSpaceSet::SetI));
    EXPECT_THROW(evaluate_agent(agent, cfg, traces, cfg.eval_start, cfg.eval_end), ShapeError);
}

TEST(Run, SingleEpisodeWritesArtifacts) {
    TempDir tmp("single");
    const RunConfig cfg = tiny_config();
    const TraceSet traces = load_run_traces(cfg);
    const RunOutcome o = run_training_job(cfg, traces, tmp.path(), true);
    for (const char* f : {"config.ini", "seed.txt", "trace_hash.txt", "episodes.csv", "losses.csv", "checkpoint.bin",
                          "eval_summary.csv", "eval_trace_drl.csv", "eval_trace_rbc.csv", "eval_delta.csv",
                          "precool.csv", "in_training_delta.csv"}) {
        EXPECT_TRUE(fs::exists(tmp.path() / f)) << f;
    }
    const std::string episodes = slurp(tmp.path() / "episodes.csv");
    EXPECT_EQ(count_lines(episodes), 2);
    EXPECT_EQ(episodes.substr(0, episodes.find('\n')), kEpisodeCsvHeader);
    EXPECT_EQ(slurp(tmp.path() / "seed.txt"), "0\n");
    EXPECT_EQ(slurp(tmp.path() / "trace_hash.txt"), trace_hash(traces) + "\n");
    ASSERT_TRUE(o.in_training.has_value());
    EXPECT_EQ(o.in_training->drl.steps, static_cast<std::size_t>((cfg.episode_end - cfg.episode_start) / 15));

    // Checkpoint reproduces the evaluation.
    const SacAgent loaded = SacAgent::load_checkpoint((tmp.path() / "checkpoint.bin").string());
    const Comparison again = evaluate_agent(loaded, cfg, traces, cfg.eval_start, cfg.eval_end);
    EXPECT_EQ(again.drl.energy_cost, o.test.drl.energy_cost);
    EXPECT_EQ(again.drl.discomfort_degree_hours, o.test.drl.discomfort_degree_hours);

    const auto delta = read_delta_csv(tmp.path() / "eval_delta.csv");
    EXPECT_DOUBLE_EQ(delta.at("energy_cost").drl, o.test.drl.energy_cost);
    EXPECT_DOUBLE_EQ(delta.at("energy_cost").rbc, o.test.rbc.energy_cost);
}

TEST(Run, RerunFromPersistedConfigIsBitIdentical) {
    TempDir a("rerun_a");
    TempDir b("rerun_b");
    RunConfig cfg = tiny_config();
    cfg.episodes = 2;
    cfg.hyperparams.seed = 5;
    const TraceSet traces = load_run_traces(cfg);
    run_training_job(cfg, traces, a.path());
    const RunConfig back = load_config((a.path() / "config.ini").string());
    run_training_job(back, load_run_traces(back), b.path());
    for (const char* f : {"episodes.csv", "losses.csv", "eval_trace_drl.csv", "trace_hash.txt", "config.ini"}) {
        EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
    }
    EXPECT_EQ(count_lines(slurp(a.path() / "episodes.csv")), 3);
}

TEST(Run, InvalidConfigIsConfigError) {
    TempDir tmp("invalid");
    RunConfig cfg = tiny_config();
    cfg.hyperparams.alpha = -1.0;
    EXPECT_THROW(run_training_job(cfg, load_run_traces(cfg), tmp.path()), ConfigError);
}

TEST(Pool, CollectsPerJobErrors) {
    std::vector<int> done(6, 0);
    const auto errors = run_pool(6, 3, [&](std::size_t i) {
        if (i == 2) throw RunFailure("boom");
        done[i] = 1;
    });
    EXPECT_EQ(errors[2], "boom");
    for (std::size_t i = 0; i < 6; ++i) {
        if (i != 2) {
            EXPECT_TRUE(errors[i].empty());
            EXPECT_EQ(done[i], 1);
        }
    }
}

TEST(Sweep, DefaultGridSize) {
    const SweepSpec spec;
    EXPECT_EQ(sweep_cells(spec).size(), 18u);
    EXPECT_EQ(sweep_cells(spec).size() * spec.seeds.size(), 54u);
    SweepSpec one;
    one.gammas = {0.99};
    one.alphas = {0.05};
    one.lambdas = {100.0};
    EXPECT_EQ(sweep_cells(one).size(), 1u);
}

TEST(Sweep, FailingCellIsFlaggedAndOthersSurvive) {
    TempDir serial("sweep_serial");
    TempDir parallel("sweep_parallel");
    const RunConfig cfg = tiny_config();
    const TraceSet traces = load_run_traces(cfg);
    SweepSpec spec;
    spec.gammas = {0.99, 1.5};  // the second cell cannot be trained
    spec.alphas = {0.05};
    spec.lambdas = {100.0};
    spec.seeds = {0, 1};
    const auto points = run_sweep(cfg, traces, spec, serial.path(), 1);
    ASSERT_EQ(points.size(), 2u);
    EXPECT_EQ(points[0].runs_ok, 2);
    EXPECT_EQ(points[0].runs_failed, 0);
    EXPECT_FALSE(points[0].flagged);
    EXPECT_EQ(points[1].runs_ok, 0);
    EXPECT_EQ(points[1].runs_failed, 2);
    EXPECT_TRUE(points[1].flagged);
    EXPECT_TRUE(std::isnan(points[1].cost_change_pct));
    EXPECT_TRUE(fs::exists(serial.path() / "sweep" / points[1].cell.name / "0" / "FAILED.txt"));

    // Cell means come from the per-run files.
    double cost = 0.0;
    for (int s : {0, 1}) {
        const auto rows =
            read_delta_csv(serial.path() / "sweep" / points[0].cell.name / std::to_string(s) / "eval_delta.csv");
        cost += *rows.at("energy_cost").percent / 2.0;
    }
    EXPECT_NEAR(points[0].cost_change_pct, cost, 1e-9);

    const std::string table = slurp(serial.path() / "sweep" / "pareto.csv");
    EXPECT_EQ(count_lines(table), 3);
    EXPECT_EQ(count_lines(slurp(serial.path() / "sweep" / "pareto_plot_data.csv")), 5);

    run_sweep(cfg, traces, spec, parallel.path(), 2);
    EXPECT_EQ(slurp(parallel.path() / "sweep" / "pareto.csv"), table);
}

TEST(Robustness, ExclusionRule) {
    EXPECT_TRUE(exceeds_discomfort_threshold(pct_change(2.6, 1.0), 150.0));
    EXPECT_FALSE(exceeds_discomfort_threshold(pct_change(2.5, 1.0), 150.0));
    EXPECT_FALSE(exceeds_discomfort_threshold(pct_change(0.0, 0.0), 150.0));
    EXPECT_TRUE(exceeds_discomfort_threshold(pct_change(0.1, 0.0), 150.0));
}

TEST(Robustness, GridTable) {
    const RobustnessSpec full;
    EXPECT_EQ(full.episodes.size() * full.update_intervals.size(), 15u);

    TempDir tmp("robust");
    const RunConfig cfg = tiny_config();
    RobustnessSpec spec;
    spec.episodes = {1};
    spec.update_intervals = {4, 96};
    const auto rows = run_robustness(cfg, load_run_traces(cfg), spec, tmp.path(), 1);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.ok) << r.error;
        ASSERT_TRUE(r.in_training.has_value());
        ASSERT_TRUE(r.test.has_value());
        EXPECT_EQ(r.excluded, exceeds_discomfort_threshold(r.test->discomfort, 150.0));
    }
    EXPECT_EQ(rows[0].cell, "ep1_upd4");
    const std::string table = slurp(tmp.path() / "robustness" / "robustness.csv");
    EXPECT_EQ(table.substr(0, table.find('\n')), kRobustnessHeader);
    EXPECT_EQ(count_lines(table), 3);
}

TEST(Transfer, TrainingClimateMatchesEvaluate) {
    TempDir tmp("transfer");
    const RunConfig cfg = tiny_config();
    const TraceSet traces = load_run_traces(cfg);
    TrainResult tr = train_agent(cfg, traces);
    const Comparison direct = evaluate_agent(tr.agent, cfg, traces, cfg.eval_start, cfg.eval_end);
    const auto res = run_transfer(tr.agent, {climate_target(cfg, cfg.synthetic.climate_zone)}, tmp.path());
    ASSERT_EQ(res.size(), 1u);
    EXPECT_EQ(res[0].comparison.drl.energy_cost, direct.drl.energy_cost);
    EXPECT_EQ(res[0].comparison.rbc.energy_cost, direct.rbc.energy_cost);
    EXPECT_EQ(res[0].comparison.drl.discomfort_degree_hours, direct.drl.discomfort_degree_hours);
}

TEST(Transfer, AllClimatesAndSeason) {
    TempDir tmp("transfer_all");
    const RunConfig cfg = tiny_config();
    const SacAgent agent(cfg.hyperparams, observation_size(cfg.state_space_set));
    std::vector<TransferTarget> targets;
    for (int z = 0; z < 9; ++z) targets.push_back(climate_target(cfg, z));
    targets.push_back(season_target(cfg));
    EXPECT_EQ(targets.back().tag, "transition season");
    const auto res = run_transfer(agent, targets, tmp.path());
    ASSERT_EQ(res.size(), 10u);
    for (const auto& r : res) {
        EXPECT_TRUE(r.comparison.drl.complete) << r.tag;
        EXPECT_GT(r.comparison.rbc.energy_cost, 0.0) << r.tag;
        std::string prefix = r.tag;
        std::replace(prefix.begin(), prefix.end(), ' ', '_');
        EXPECT_TRUE(fs::exists(tmp.path() / (prefix + "_delta.csv"))) << r.tag;
    }
    EXPECT_EQ(count_lines(slurp(tmp.path() / "transfer.csv")), 11);
}
