#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "flexsac/config.hpp"
#include "flexsac/harness.hpp"
#include "flexsac/reward.hpp"

using namespace flexsac;

TEST(Reward, ZeroInsideBandWithoutEnergy) {
    const auto r = reward(0.0, 0.1, 23.0, 21.0, 26.0, 1e-5, 100.0);
    EXPECT_EQ(r.total, 0.0);
    EXPECT_EQ(r.comfort_term, 0.0);
}

TEST(Reward, CostTermByHand) {
    const auto r = reward(10000.0, 0.10, 23.0, 21.0, 26.0, 1e-5, 100.0);
    EXPECT_NEAR(r.cost_term, -0.01, 1e-15);
    EXPECT_EQ(r.comfort_term, 0.0);
    EXPECT_EQ(r.total, r.cost_term + r.comfort_term);
}

TEST(Reward, ComfortTermAboveBand) {
    const auto r = reward(0.0, 0.1, 26.5, 21.0, 26.0, 1e-5, 100.0);
    EXPECT_NEAR(r.comfort_term, -50.0, 1e-12);
}

TEST(Reward, ComfortTermBelowBand) {
    const auto r = reward(0.0, 0.1, 20.0, 21.0, 26.0, 1e-5, 100.0);
    EXPECT_NEAR(r.comfort_term, -100.0, 1e-12);
}

TEST(Reward, InvalidBoundsRejected) {
    EXPECT_THROW(reward(0.0, 0.1, 23.0, 26.0, 26.0, 1e-5, 100.0), ConfigError);
    EXPECT_THROW(reward(0.0, 0.1, 23.0, 27.0, 26.0, 1e-5, 100.0), ConfigError);
}

TEST(Reward, TermsNonPositiveAndSumExact) {
    for (double t = 15.0; t <= 35.0; t += 0.173) {
        for (double e : {0.0, 3.7, 250.0}) {
            const auto r = reward(e, 0.08, t, 21.0, 26.0, 1e-5, 500.0);
            EXPECT_LE(r.cost_term, 0.0);
            EXPECT_LE(r.comfort_term, 0.0);
            EXPECT_EQ(r.total, r.cost_term + r.comfort_term);
            const double dist = std::max({0.0, t - 26.0, 21.0 - t});
            EXPECT_NEAR(r.comfort_term, -500.0 * dist, 1e-9);
            if (dist > 0.0) {
                EXPECT_LT(r.comfort_term, 0.0);
            }
        }
    }
}

TEST(Reward, ContinuousAtBounds) {
    for (double bound : {21.0, 26.0}) {
        const double eps = 1e-9;
        const auto lo = reward(0.0, 0.1, bound - eps, 21.0, 26.0, 1e-5, 1000.0);
        const auto hi = reward(0.0, 0.1, bound + eps, 21.0, 26.0, 1e-5, 1000.0);
        EXPECT_NEAR(lo.comfort_term, hi.comfort_term, 2e-6);
        EXPECT_EQ(reward(0.0, 0.1, bound, 21.0, 26.0, 1e-5, 1000.0).comfort_term, 0.0);
    }
}

TEST(Reward, StepRewardAppliesEnergyScale) {
    StepResult s;
    s.e_hvac = 2.0;  // kWh
    s.price = 0.1;
    s.t_zone = 24.0;
    s.t_min = 21.0;
    s.t_max = 26.0;
    const RewardWeights w{1e-5, 100.0, 1000.0};
    EXPECT_NEAR(step_reward(s, w).cost_term, -1e-5 * 2000.0 * 0.1, 1e-15);
}

TEST(Discomfort, AlwaysInBounds) {
    const std::vector<double> z{22, 23, 24}, lo{21, 21, 21}, hi{26, 26, 26};
    EXPECT_EQ(discomfort_degree_hours(z, lo, hi, 1.0), 0.0);
}

TEST(Discomfort, OneDegreeForOneHour) {
    const std::vector<double> z{27.0}, lo{21.0}, hi{26.0};
    EXPECT_EQ(discomfort_degree_hours(z, lo, hi, 1.0), 1.0);
}

TEST(Discomfort, HalfDegreeTwoQuarterHours) {
    const std::vector<double> z{26.5, 26.5}, lo{21.0, 21.0}, hi{26.0, 26.0};
    EXPECT_DOUBLE_EQ(discomfort_degree_hours(z, lo, hi, 0.25), 0.25);
}

TEST(Discomfort, MisalignedTracesRejected) {
    const std::vector<double> z{26.5, 26.5}, lo{21.0}, hi{26.0, 26.0};
    EXPECT_THROW(discomfort_degree_hours(z, lo, hi, 0.25), ShapeError);
}

TEST(Discomfort, InvariantUnderSubstepSplitting) {
    Rng rng(11);
    std::vector<double> z, lo, hi, z4, lo4, hi4;
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(18.0, 30.0);
        z.push_back(t);
        lo.push_back(21.0);
        hi.push_back(26.0);
        for (int k = 0; k < 4; ++k) {
            z4.push_back(t);
            lo4.push_back(21.0);
            hi4.push_back(26.0);
        }
    }
    EXPECT_NEAR(discomfort_degree_hours(z, lo, hi, 1.0), discomfort_degree_hours(z4, lo4, hi4, 0.25), 1e-12);
}

TEST(PctChange, ReferenceRowsWithinTenthOfPoint) {
    EXPECT_NEAR(*pct_change_cost(5150, 5702).percent, -9.68, 0.01);
    EXPECT_NEAR(*pct_change(105.18, 115.34).percent, -8.81, 0.01);
    EXPECT_NEAR(*pct_change_discomfort(0.13, 0.60).percent, -78.33, 0.01);
}

TEST(PctChange, ZeroReferenceIsUndefined) {
    const auto c = pct_change_discomfort(0.4, 0.0);
    EXPECT_FALSE(c.percent.has_value());
    EXPECT_EQ(c.value, 0.4);
    EXPECT_EQ(c.reference, 0.0);
    EXPECT_EQ(format_pct(c), "undefined");
}

TEST(EpisodeReport, ConstantLoadArithmetic) {
    std::vector<StepResult> steps(96);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        StepResult& s = steps[i];
        s.timestamp = static_cast<Minutes>(i) * 15;
        s.e_hvac = 10.0;
        s.e_total = 25.0;  // 100 kW for 15 min
        s.price = 0.10;
        s.t_zone = 24.0;
        s.t_min = 21.0;
        s.t_max = 26.0;
        s.step_hours = 0.25;
    }
    steps.back().done = true;
    const EpisodeReport r = episode_report(steps, RewardWeights{}, 96);
    EXPECT_NEAR(r.energy_purchased_mwh, 2.4, 1e-12);
    EXPECT_NEAR(r.energy_cost, 240.0, 1e-9);
    EXPECT_NEAR(r.hvac_energy_mwh, 0.96, 1e-12);
    EXPECT_EQ(r.discomfort_degree_hours, 0.0);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.trace.size(), 96u);
    EXPECT_NEAR(r.trace[0].e_total_kw, 100.0, 1e-12);
}

TEST(EpisodeReport, PartialRunFlagged) {
    std::vector<StepResult> steps(10);
    for (auto& s : steps) {
        s.t_min = 21.0;
        s.t_max = 26.0;
        s.t_zone = 24.0;
        s.step_hours = 0.25;
        s.price = 0.1;
    }
    EXPECT_FALSE(episode_report(steps, RewardWeights{}).complete);
    steps.back().done = true;
    EXPECT_FALSE(episode_report(steps, RewardWeights{}, 96).complete);
    EXPECT_TRUE(episode_report(steps, RewardWeights{}, 10).complete);
}

TEST(EpisodeReport, EmptyRejected) {
    EXPECT_THROW(episode_report(std::span<const StepResult>{}, RewardWeights{}), StateError);
}

TEST(EpisodeReport, RbcRepeatIsIdentical) {
    const RunConfig cfg;
    const TraceSet tr = load_run_traces(cfg);
    const auto a = rbc_report(cfg, tr, cfg.eval_start, cfg.eval_end);
    const auto b = rbc_report(cfg, tr, cfg.eval_start, cfg.eval_end);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(a.energy_cost, b.energy_cost);
    EXPECT_TRUE(a.complete);
}

TEST(EpisodeReport, TraceCsvHeader) {
    const RunConfig cfg;
    const TraceSet tr = load_run_traces(cfg);
    std::ostringstream out;
    write_trace_csv(out, rbc_report(cfg, tr, cfg.eval_start, cfg.eval_start + kMinutesPerDay));
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "timestamp,t_zone,setpoint,e_hvac_kw,e_total_kw,price,reward_cost,reward_comfort");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 96);
}

TEST(EpisodeReport, AccumulatorsHaveSigns) {
    const RunConfig cfg;
    const TraceSet tr = load_run_traces(cfg);
    const auto r = rbc_report(cfg, tr, cfg.eval_start, cfg.eval_end);
    EXPECT_GT(r.energy_purchased_mwh, r.hvac_energy_mwh);
    EXPECT_GT(r.energy_cost, r.hvac_cost);
    EXPECT_GE(r.discomfort_degree_hours, 0.0);
    EXPECT_LE(r.reward_cost, 0.0);
    EXPECT_LE(r.reward_comfort, 0.0);
}
