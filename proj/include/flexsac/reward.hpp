#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "flexsac/env.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/time.hpp"
#include "flexsac/traces.hpp"

namespace flexsac {

struct RewardBreakdown {
    double cost_term = 0.0;
    double comfort_term = 0.0;
    double total = 0.0;
};

/// r = -beta * e_hvac * price - lambda * |t_zone - t_lim|, where t_lim is
/// the violated bound (or t_zone itself inside the band).
inline RewardBreakdown reward(double e_hvac, double price, double t_zone, double t_min, double t_max, double beta,
                              double lambda) {
    if (!(t_max > t_min)) throw ConfigError("comfort bounds need t_max > t_min");
    double t_lim = t_zone;
    if (t_zone < t_min) {
        t_lim = t_min;
    } else if (t_zone > t_max) {
        t_lim = t_max;
    }
    RewardBreakdown r;
    r.cost_term = -beta * e_hvac * price;
    r.comfort_term = -lambda * std::abs(t_zone - t_lim);
    r.total = r.cost_term + r.comfort_term;
    return r;
}

/// Weights plus the factor applied to HVAC energy (kWh) before it enters
/// the cost term. The default puts the cost term at order one per control
/// step for the reference building; raw kWh leaves it near 1e-4.
struct RewardWeights {
    double beta = 1e-5;
    double lambda = 100.0;
    double energy_scale = 2e4;
};

inline RewardBreakdown step_reward(const StepResult& s, const RewardWeights& w) {
    return reward(s.e_hvac * w.energy_scale, s.price, s.t_zone, s.t_min, s.t_max, w.beta, w.lambda);
}

/// Sum over steps of the excursion beyond the band times the step length.
inline double discomfort_degree_hours(std::span<const double> t_zone, std::span<const double> t_min,
                                      std::span<const double> t_max, double step_hours) {
    if (t_zone.size() != t_min.size() || t_zone.size() != t_max.size()) {
        throw ShapeError("discomfort traces are misaligned");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < t_zone.size(); ++i) {
        total += std::max({0.0, t_zone[i] - t_max[i], t_min[i] - t_zone[i]}) * step_hours;
    }
    return total;
}

/// Relative change against a reference run. `percent` is empty when the
/// reference is not positive; the raw values are always kept.
struct PctChange {
    std::optional<double> percent;
    double value = 0.0;
    double reference = 0.0;
};

inline PctChange pct_change(double value, double reference) {
    PctChange c{std::nullopt, value, reference};
    if (reference > 0.0) c.percent = 100.0 * (value - reference) / reference;
    return c;
}

inline PctChange pct_change_cost(double cost_drl, double cost_rbc) { return pct_change(cost_drl, cost_rbc); }

inline PctChange pct_change_discomfort(double d_drl, double d_rbc) { return pct_change(d_drl, d_rbc); }

inline std::string format_pct(const PctChange& c) {
    if (!c.percent) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *c.percent);
    return buf;
}

// ---------------------------------------------------------------------------
// Episode reports
// ---------------------------------------------------------------------------

struct TraceRecord {
    Minutes timestamp = 0;
    double t_zone = 0.0;
    double setpoint = 0.0;
    double e_hvac_kw = 0.0;
    double e_total_kw = 0.0;
    double price = 0.0;
    double reward_cost = 0.0;
    double reward_comfort = 0.0;
};

struct EpisodeReport {
    double energy_purchased_mwh = 0.0;
    double energy_cost = 0.0;
    double hvac_energy_mwh = 0.0;
    double hvac_cost = 0.0;
    double discomfort_degree_hours = 0.0;
    double reward_cost = 0.0;
    double reward_comfort = 0.0;
    double reward_total = 0.0;
    std::size_t steps = 0;
    bool complete = true;
    std::vector<TraceRecord> trace;
};

/// Aggregates a run. Cost integrates the price at each step's start.
/// `expected_steps` (when non-zero) marks shorter runs as partial.
inline EpisodeReport episode_report(std::span<const StepResult> steps, const RewardWeights& weights,
                                    std::size_t expected_steps = 0) {
    if (steps.empty()) throw StateError("episode report needs at least one step");
    EpisodeReport rep;
    rep.steps = steps.size();
    rep.trace.reserve(steps.size());
    for (const StepResult& s : steps) {
        const RewardBreakdown r = step_reward(s, weights);
        rep.energy_purchased_mwh += s.e_total / 1000.0;
        rep.energy_cost += s.e_total * s.price;
        rep.hvac_energy_mwh += s.e_hvac / 1000.0;
        rep.hvac_cost += s.e_hvac * s.price;
        rep.discomfort_degree_hours += std::max({0.0, s.t_zone - s.t_max, s.t_min - s.t_zone}) * s.step_hours;
        rep.reward_cost += r.cost_term;
        rep.reward_comfort += r.comfort_term;
        rep.trace.push_back({s.timestamp, s.t_zone, s.setpoint, s.e_hvac / s.step_hours, s.e_total / s.step_hours,
                             s.price, r.cost_term, r.comfort_term});
    }
    rep.reward_total = rep.reward_cost + rep.reward_comfort;
    rep.complete = steps.back().done && (expected_steps == 0 || steps.size() == expected_steps);
    return rep;
}

inline constexpr const char* kTraceRecordHeader =
    "timestamp,t_zone,setpoint,e_hvac_kw,e_total_kw,price,reward_cost,reward_comfort";

inline void write_trace_csv(std::ostream& out, const EpisodeReport& rep) {
    out << kTraceRecordHeader << '\n';
    for (const TraceRecord& r : rep.trace) {
        out << format_rfc3339(r.timestamp) << ',' << detail::format_double(r.t_zone) << ','
            << detail::format_double(r.setpoint) << ',' << detail::format_double(r.e_hvac_kw) << ','
            << detail::format_double(r.e_total_kw) << ',' << detail::format_double(r.price) << ','
            << detail::format_double(r.reward_cost) << ',' << detail::format_double(r.reward_comfort) << '\n';
    }
}

inline constexpr const char* kSummaryHeader =
    "controller,energy_purchased_mwh,energy_cost,hvac_energy_mwh,hvac_cost,discomfort_degree_hours,"
    "reward_cost,reward_comfort,reward_total,steps,complete";

inline void write_summary_row(std::ostream& out, const std::string& controller, const EpisodeReport& r) {
    out << controller << ',' << detail::format_double(r.energy_purchased_mwh) << ','
        << detail::format_double(r.energy_cost) << ',' << detail::format_double(r.hvac_energy_mwh) << ','
        << detail::format_double(r.hvac_cost) << ',' << detail::format_double(r.discomfort_degree_hours) << ','
        << detail::format_double(r.reward_cost) << ',' << detail::format_double(r.reward_comfort) << ','
        << detail::format_double(r.reward_total) << ',' << r.steps << ',' << (r.complete ? 1 : 0) << '\n';
}

}  // namespace flexsac
