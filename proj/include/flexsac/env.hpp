#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "flexsac/core.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/thermal.hpp"
#include "flexsac/time.hpp"
#include "flexsac/traces.hpp"

namespace flexsac {

using Observation = std::vector<double>;

enum class StateSpaceSet { SetI = 1, SetII = 2, SetIII = 3 };

inline StateSpaceSet state_space_from_int(int v) {
    if (v < 1 || v > 3) throw ConfigError("state space set must be 1, 2 or 3");
    return static_cast<StateSpaceSet>(v);
}

inline constexpr int kLagSteps = 4;        // one hour of 15-minute history
inline constexpr int kLookaheadHours = 4;  // perfect-foresight horizon

/// Observation length per state-space set.
///   Set I   12: price, HVAC kW, total kW, zone temp, weekday, hour,
///               drybulb, wetbulb, wind speed, wind direction, RH, solar
///   Set II  26: + price at +1..+4 h, TES tank temp, occupancy,
///               4 HVAC-demand lags, 4 zone-temperature lags
///   Set III 42: + (drybulb, wetbulb, RH, solar) at each of +1..+4 h
inline constexpr std::size_t observation_size(StateSpaceSet set) {
    switch (set) {
        case StateSpaceSet::SetI: return 12;
        case StateSpaceSet::SetII: return 26;
        case StateSpaceSet::SetIII: return 42;
    }
    return 0;
}

inline std::vector<std::string> observation_feature_names(StateSpaceSet set) {
    std::vector<std::string> n{"price",  "hvac_kw",   "total_kw",  "t_zone", "day_of_week", "hour_of_day",
                               "tdb_c",  "twb_c",     "wind_mps",  "wind_deg", "rh_pct",    "solar_wm2"};
    if (set == StateSpaceSet::SetI) return n;
    for (int k = 1; k <= kLookaheadHours; ++k) n.push_back("price_+" + std::to_string(k) + "h");
    n.push_back("tes_tank_c");
    n.push_back("occupancy");
    for (int k = 1; k <= kLagSteps; ++k) n.push_back("hvac_kw_lag" + std::to_string(k));
    for (int k = 1; k <= kLagSteps; ++k) n.push_back("t_zone_lag" + std::to_string(k));
    if (set == StateSpaceSet::SetII) return n;
    for (int k = 1; k <= kLookaheadHours; ++k) {
        for (const char* v : {"tdb_c", "twb_c", "rh_pct", "solar_wm2"}) n.push_back(std::string(v) + "_+" + std::to_string(k) + "h");
    }
    return n;
}

/// Min-max bounds per raw feature. Chosen to span the nine climate
/// stand-ins and the default building's plant sizes.
struct NormalizationTable {
    NormalizationSpec price{0.0, 0.25};
    NormalizationSpec hvac_kw{0.0, 1000.0};
    NormalizationSpec total_kw{0.0, 2000.0};
    NormalizationSpec t_zone{15.0, 35.0};
    NormalizationSpec day_of_week{1.0, 7.0};
    NormalizationSpec hour_of_day{1.0, 24.0};
    NormalizationSpec tdb{-20.0, 45.0};
    NormalizationSpec twb{-20.0, 32.0};
    NormalizationSpec wind{0.0, 20.0};
    NormalizationSpec wind_deg{0.0, 360.0};
    NormalizationSpec rh{0.0, 100.0};
    NormalizationSpec solar{0.0, 1000.0};
    NormalizationSpec tes_tank{4.0, 14.0};
    NormalizationSpec occupancy{0.0, 1.0};

    void validate() const {
        for (const auto* s : {&price, &hvac_kw, &total_kw, &t_zone, &day_of_week, &hour_of_day, &tdb, &twb, &wind,
                              &wind_deg, &rh, &solar, &tes_tank, &occupancy}) {
            s->validate();
        }
    }

    friend bool operator==(const NormalizationTable&, const NormalizationTable&) = default;
};

// ---------------------------------------------------------------------------
// Building, comfort and baseline control parameters
// ---------------------------------------------------------------------------

struct BuildingParams {
    double floor_area_m2 = 46320.0;
    double u_value_w_m2k = 0.857;
    double envelope_area_m2 = 16000.0;
    double infiltration_w_k = 8000.0;
    double ventilation_w_k = 30000.0;  // only while the building is open
    TwoNodeRc rc{};

    double people_gain_w_m2 = 6.0;       // x occupancy
    double equipment_power_w_m2 = 10.0;  // x occupancy, electric and heat
    double base_power_w_m2 = 1.5;        // always on, electric and heat
    double radiant_fraction = 0.5;       // share of internal gains to the mass node
    double solar_aperture_m2 = 600.0;    // direct solar onto the mass node

    double cop = 3.5;
    double plant_capacity_kw = 0.0;  // <= 0: autosize from the trace's design day
    double sizing_factor = 1.0;
    double design_setpoint_c = 24.0;

    double tes_volume_m3 = 100.0;
    double tes_delta_t_k = 6.0;
    double tes_cold_c = 6.0;  // tank temperature when fully charged
    double tes_charge_kw = 150.0;     // thermal, secondary chiller
    double tes_discharge_kw = 250.0;  // thermal
    double tes_cop = 3.5;
    double tes_initial_soc = 0.5;

    double initial_zone_c = 26.0;
    double initial_mass_c = 26.0;

    double envelope_conductance_w_k() const { return u_value_w_m2k * envelope_area_m2; }

    /// Chilled-water capacity of the tank in kWh thermal.
    double tes_capacity_kwh() const { return tes_volume_m3 * 1000.0 * 4.186 * tes_delta_t_k / 3600.0; }

    void validate() const {
        if (!(rc.air_capacitance > 0 && rc.mass_capacitance > 0 && rc.air_mass_conductance > 0)) {
            throw ConfigError("RC capacitances and coupling must be > 0");
        }
        if (!(envelope_conductance_w_k() + infiltration_w_k > 0)) throw ConfigError("outdoor conductance must be > 0");
        if (!(cop > 0 && tes_cop > 0)) throw ConfigError("COP must be > 0");
        if (radiant_fraction < 0 || radiant_fraction > 1) throw ConfigError("radiant_fraction must be in [0,1]");
        if (tes_initial_soc < 0 || tes_initial_soc > 1) throw ConfigError("tes_initial_soc must be in [0,1]");
        if (tes_volume_m3 < 0 || tes_delta_t_k <= 0) throw ConfigError("bad TES geometry");
        if (sizing_factor <= 0) throw ConfigError("sizing_factor must be > 0");
    }

    friend bool operator==(const BuildingParams& a, const BuildingParams& b) {
        auto tie = [](const BuildingParams& p) {
            return std::tuple(p.floor_area_m2, p.u_value_w_m2k, p.envelope_area_m2, p.infiltration_w_k,
                              p.ventilation_w_k, p.rc.air_capacitance, p.rc.mass_capacitance,
                              p.rc.air_mass_conductance, p.people_gain_w_m2, p.equipment_power_w_m2,
                              p.base_power_w_m2, p.radiant_fraction, p.solar_aperture_m2, p.cop,
                              p.plant_capacity_kw, p.sizing_factor, p.design_setpoint_c, p.tes_volume_m3,
                              p.tes_delta_t_k, p.tes_cold_c, p.tes_charge_kw, p.tes_discharge_kw, p.tes_cop,
                              p.tes_initial_soc, p.initial_zone_c, p.initial_mass_c);
        };
        return tie(a) == tie(b);
    }
};

/// Comfort band by operating state. Defaults: open [21, 26] degC,
/// closed [15, 32] degC.
class ComfortSchedule {
public:
    double occupied_min = 21.0;
    double occupied_max = 26.0;
    double unoccupied_min = 15.0;
    double unoccupied_max = 32.0;
    OperatingSchedule schedule{};

    struct Bounds {
        double t_min;
        double t_max;
    };

    Bounds bounds(Minutes t) const {
        return schedule.is_open(t) ? Bounds{occupied_min, occupied_max} : Bounds{unoccupied_min, unoccupied_max};
    }

    void validate() const {
        if (!(occupied_max > occupied_min) || !(unoccupied_max > unoccupied_min)) {
            throw ConfigError("comfort t_max must exceed t_min");
        }
    }

    friend bool operator==(const ComfortSchedule&, const ComfortSchedule&) = default;
};

/// Preset time-based cooling setpoint schedule used as the reference.
struct RbcParams {
    double occupied_setpoint_c = 24.0;
    double setback_setpoint_c = 28.0;
    OperatingSchedule schedule{};

    friend bool operator==(const RbcParams&, const RbcParams&) = default;
};

inline double rbc_policy(Minutes t, const RbcParams& p = {}) {
    return p.schedule.is_open(t) ? p.occupied_setpoint_c : p.setback_setpoint_c;
}

struct EnvConfig {
    BuildingParams building{};
    ComfortSchedule comfort{};
    RbcParams rbc{};
    NormalizationTable normalization{};
    StateSpaceSet state_space = StateSpaceSet::SetII;
    Minutes sim_step_minutes = 15;

    void validate() const {
        building.validate();
        comfort.validate();
        normalization.validate();
        if (sim_step_minutes <= 0 || kMinutesPerHour % sim_step_minutes != 0) {
            throw ConfigError("sim step must divide one hour");
        }
    }
};

// ---------------------------------------------------------------------------
// State and step results
// ---------------------------------------------------------------------------

/// Fixed-length history, newest first.
template <int N>
struct LagBuffer {
    std::array<double, N> values{};

    void fill(double v) { values.fill(v); }
    void push(double v) {
        for (int i = N - 1; i > 0; --i) values[i] = values[i - 1];
        values[0] = v;
    }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

struct BuildingState {
    double t_zone = 26.0;
    double t_mass = 26.0;
    double tes_soc = 0.5;
    Minutes sim_clock = 0;
    double hvac_kw = 0.0;   // average over the most recent sim step
    double total_kw = 0.0;
    LagBuffer<kLagSteps> hvac_lag;   // the kLagSteps values before hvac_kw
    LagBuffer<kLagSteps> zone_lag;   // the kLagSteps values before t_zone
};

struct StepResult {
    Minutes timestamp = 0;  // start of the simulated interval
    double setpoint = 0.0;
    double t_zone = 0.0;    // at the end of the interval
    double t_mass = 0.0;
    double tes_soc = 0.0;
    double q_cool_kw = 0.0;       // thermal cooling delivered to the zone (chiller + TES)
    double q_tes_kw = 0.0;        // >0 discharge, <0 charge
    double e_hvac = 0.0;          // kWh electric this step
    double e_total = 0.0;         // kWh electric this step
    double price = 0.0;           // per kWh at the step start
    double t_min = 0.0;
    double t_max = 0.0;
    double step_hours = 0.0;
    bool done = false;
    Observation observation;
};

/// Assembles the normalized feature vector for `set` at the state's clock.
inline Observation build_observation(const BuildingState& state, const TraceSet& traces, StateSpaceSet set,
                                     const NormalizationTable& norm, const BuildingParams& building) {
    const Minutes t = state.sim_clock;
    const TraceRow& now = traces.at(t);
    // Resolve the lookahead rows first so a short trace fails before any work.
    std::array<const TraceRow*, kLookaheadHours> ahead{};
    if (set != StateSpaceSet::SetI) {
        for (int k = 0; k < kLookaheadHours; ++k) ahead[k] = &traces.at(t + (k + 1) * kMinutesPerHour);
    }

    Observation obs;
    obs.reserve(observation_size(set));
    obs.push_back(normalize(now.price_per_kwh, norm.price));
    obs.push_back(normalize(state.hvac_kw, norm.hvac_kw));
    obs.push_back(normalize(state.total_kw, norm.total_kw));
    obs.push_back(normalize(state.t_zone, norm.t_zone));
    obs.push_back(normalize(iso_weekday(t), norm.day_of_week));
    obs.push_back(normalize(hour_of_day(t) + 1, norm.hour_of_day));
    obs.push_back(normalize(now.tdb_c, norm.tdb));
    obs.push_back(normalize(now.twb_c, norm.twb));
    obs.push_back(normalize(now.wind_mps, norm.wind));
    obs.push_back(normalize(now.wind_deg, norm.wind_deg));
    obs.push_back(normalize(now.rh_pct, norm.rh));
    obs.push_back(normalize(now.solar_wm2, norm.solar));
    if (set == StateSpaceSet::SetI) return obs;

    for (const TraceRow* r : ahead) obs.push_back(normalize(r->price_per_kwh, norm.price));
    const double tank_c = building.tes_cold_c + (1.0 - state.tes_soc) * building.tes_delta_t_k;
    obs.push_back(normalize(tank_c, norm.tes_tank));
    obs.push_back(normalize(now.occupancy, norm.occupancy));
    for (int k = 0; k < kLagSteps; ++k) obs.push_back(normalize(state.hvac_lag[k], norm.hvac_kw));
    for (int k = 0; k < kLagSteps; ++k) obs.push_back(normalize(state.zone_lag[k], norm.t_zone));
    if (set == StateSpaceSet::SetII) return obs;

    for (const TraceRow* r : ahead) {
        obs.push_back(normalize(r->tdb_c, norm.tdb));
        obs.push_back(normalize(r->twb_c, norm.twb));
        obs.push_back(normalize(r->rh_pct, norm.rh));
        obs.push_back(normalize(r->solar_wm2, norm.solar));
    }
    return obs;
}

inline double autosize_capacity_kw(const EnvConfig& config, const TraceSet& traces);

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

/// Building environment with reset/step semantics over a trace set.
/// Single-threaded and stateful; independent instances share nothing.
class BuildingEnv {
public:
    BuildingEnv(EnvConfig config, TraceSet traces) : config_(std::move(config)), traces_(std::move(traces)) {
        config_.validate();
        if (traces_.step_minutes() != config_.sim_step_minutes) {
            throw ConfigError("trace cadence does not match the simulation step");
        }
        capacity_kw_ = config_.building.plant_capacity_kw > 0.0 ? config_.building.plant_capacity_kw
                                                                : autosize_capacity_kw(config_, traces_);
    }

    const EnvConfig& config() const noexcept { return config_; }
    const TraceSet& traces() const noexcept { return traces_; }
    const BuildingState& state() const noexcept { return state_; }
    double plant_capacity_kw() const noexcept { return capacity_kw_; }
    std::size_t observation_size() const { return flexsac::observation_size(config_.state_space); }
    bool done() const noexcept { return done_; }
    Minutes episode_end() const noexcept { return end_; }

    /// Starts an episode over [start, end). The hour before `start` is
    /// simulated under the rule-based controller to fill the lag history.
    Observation reset(Minutes start, Minutes end) {
        const Minutes step = config_.sim_step_minutes;
        if (end <= start) throw ConfigError("episode end must be after start");
        if ((end - start) % step != 0 || start % step != 0) throw ConfigError("episode span off the sim cadence");
        traces_.require(start - kMinutesPerHour, end + kLookaheadHours * kMinutesPerHour + step);

        const BuildingParams& b = config_.building;
        state_ = BuildingState{};
        state_.t_zone = b.initial_zone_c;
        state_.t_mass = b.initial_mass_c;
        state_.tes_soc = b.tes_initial_soc;
        state_.sim_clock = start - kMinutesPerHour;
        state_.hvac_lag.fill(0.0);
        state_.zone_lag.fill(state_.t_zone);
        end_ = end;
        done_ = false;
        while (state_.sim_clock < start) simulate_one(rbc_policy(state_.sim_clock, config_.rbc));
        return build_observation(state_, traces_, config_.state_space, config_.normalization, b);
    }

    /// Holds `setpoint` for `hold` sim steps (stopping early at episode end).
    std::vector<StepResult> step(double setpoint, int hold) {
        if (done_) throw StateError("step() called after the episode finished; call reset()");
        if (!(setpoint >= kSetpointMin && setpoint <= kSetpointMax)) {
            throw ConfigError("setpoint " + std::to_string(setpoint) + " outside [21, 28] degC");
        }
        if (hold < 1) throw ConfigError("hold must be >= 1 sim step");
        std::vector<StepResult> out;
        out.reserve(static_cast<std::size_t>(hold));
        for (int i = 0; i < hold && !done_; ++i) {
            StepResult r = simulate_one(setpoint);
            done_ = state_.sim_clock >= end_;
            r.done = done_;
            r.observation = build_observation(state_, traces_, config_.state_space, config_.normalization,
                                              config_.building);
            out.push_back(std::move(r));
        }
        return out;
    }

private:
    StepResult simulate_one(double setpoint) {
        const BuildingParams& b = config_.building;
        const Minutes t = state_.sim_clock;
        const TraceRow& row = traces_.at(t);
        const double seconds = static_cast<double>(config_.sim_step_minutes) * 60.0;
        const double hours = seconds / 3600.0;
        const bool open = config_.comfort.schedule.is_open(t);

        const double h_out =
            b.envelope_conductance_w_k() + b.infiltration_w_k + (open ? b.ventilation_w_k : 0.0);
        const double electric_base_w =
            b.floor_area_m2 * (b.equipment_power_w_m2 * row.occupancy + b.base_power_w_m2);
        const double internal_w = electric_base_w + b.floor_area_m2 * b.people_gain_w_m2 * row.occupancy;
        const double q_air = (1.0 - b.radiant_fraction) * internal_w;
        const double q_mass = b.radiant_fraction * internal_w + b.solar_aperture_m2 * row.solar_wm2;

        const auto prop = b.rc.propagator(h_out, seconds);
        const TwoNodeRc::Vec2 free = TwoNodeRc::apply(prop, {state_.t_zone, state_.t_mass},
                                                      b.rc.forcing(h_out, row.tdb_c, q_air, q_mass));
        const TwoNodeRc::Vec2 resp = b.rc.cooling_response(prop);

        // Ideal thermostat: the constant cooling rate that lands the zone on
        // the setpoint at the end of the step, capped by available plant.
        const double needed_kw = std::max(0.0, (free[0] - setpoint) / resp[0]) / 1000.0;
        const double tes_cap_kwh = b.tes_capacity_kwh();
        double tes_discharge_kw = 0.0;
        double tes_charge_kw = 0.0;
        if (tes_cap_kwh > 0.0) {
            if (open && needed_kw > 0.0) {
                tes_discharge_kw = std::min({needed_kw, b.tes_discharge_kw, state_.tes_soc * tes_cap_kwh / hours});
            } else if (!open) {
                tes_charge_kw = std::min(b.tes_charge_kw, (1.0 - state_.tes_soc) * tes_cap_kwh / hours);
            }
        }
        const double primary_kw = std::min(needed_kw - tes_discharge_kw, capacity_kw_);
        const double q_cool_kw = primary_kw + tes_discharge_kw;

        StepResult r;
        r.timestamp = t;
        r.setpoint = setpoint;
        r.t_zone = free[0] - q_cool_kw * 1000.0 * resp[0];
        r.t_mass = free[1] - q_cool_kw * 1000.0 * resp[1];
        if (tes_cap_kwh > 0.0) {
            state_.tes_soc = std::clamp(state_.tes_soc + (tes_charge_kw - tes_discharge_kw) * hours / tes_cap_kwh,
                                        0.0, 1.0);
        }
        r.tes_soc = state_.tes_soc;
        r.q_cool_kw = q_cool_kw;
        r.q_tes_kw = tes_discharge_kw - tes_charge_kw;
        r.e_hvac = (primary_kw / b.cop + tes_charge_kw / b.tes_cop) * hours;
        r.e_total = r.e_hvac + electric_base_w / 1000.0 * hours;
        r.price = row.price_per_kwh;
        const auto bounds = config_.comfort.bounds(t);
        r.t_min = bounds.t_min;
        r.t_max = bounds.t_max;
        r.step_hours = hours;

        state_.hvac_lag.push(state_.hvac_kw);
        state_.zone_lag.push(state_.t_zone);
        state_.hvac_kw = r.e_hvac / hours;
        state_.total_kw = r.e_total / hours;
        state_.t_zone = r.t_zone;
        state_.t_mass = r.t_mass;
        state_.sim_clock = t + config_.sim_step_minutes;
        return r;
    }

    EnvConfig config_;
    TraceSet traces_;
    BuildingState state_{};
    double capacity_kw_ = 0.0;
    Minutes end_ = 0;
    bool done_ = true;
};

/// Design-day plant sizing. The design day takes the 1 % exceedance drybulb
/// of the trace as its peak, the trace's mean daily range, and the clearest
/// solar and fullest occupancy seen at each time slot. Two design weeks are
/// run at the constant design setpoint with unlimited plant and no storage;
/// the peak cooling rate of the second week times sizing_factor is the
/// capacity. Morning pull-down after a setback is not part of the sizing.
inline double autosize_capacity_kw(const EnvConfig& config, const TraceSet& traces) {
    const auto& rows = traces.rows();
    if (rows.empty()) throw TraceError("cannot size the plant from an empty trace");
    const Minutes step = traces.step_minutes();
    const Minutes slots_per_day = kMinutesPerDay / step;

    std::vector<double> tdb;
    tdb.reserve(rows.size());
    std::map<Minutes, std::pair<double, double>> day_range;
    std::vector<double> solar(static_cast<std::size_t>(slots_per_day), 0.0);
    std::vector<double> occupancy(static_cast<std::size_t>(7 * slots_per_day), 0.0);
    for (const TraceRow& r : rows) {
        tdb.push_back(r.tdb_c);
        const Minutes day = r.timestamp - r.timestamp % kMinutesPerDay;
        auto [it, fresh] = day_range.try_emplace(day, r.tdb_c, r.tdb_c);
        if (!fresh) {
            it->second.first = std::min(it->second.first, r.tdb_c);
            it->second.second = std::max(it->second.second, r.tdb_c);
        }
        const Minutes slot = (r.timestamp % kMinutesPerDay) / step;
        solar[static_cast<std::size_t>(slot)] = std::max(solar[static_cast<std::size_t>(slot)], r.solar_wm2);
        const auto wslot = static_cast<std::size_t>((iso_weekday(r.timestamp) - 1) * slots_per_day + slot);
        occupancy[wslot] = std::max(occupancy[wslot], r.occupancy);
    }
    const auto k = static_cast<std::size_t>(0.99 * static_cast<double>(tdb.size() - 1));
    std::nth_element(tdb.begin(), tdb.begin() + static_cast<std::ptrdiff_t>(k), tdb.end());
    const double design_max = tdb[k];
    double range = 0.0;
    for (const auto& [day, mm] : day_range) range += mm.second - mm.first;
    range /= static_cast<double>(day_range.size());

    // 2001-01-01 is a Monday; the date only fixes the weekday pattern.
    const Minutes origin = make_time(2001, 1, 1);
    const Minutes span = 15 * kMinutesPerDay;
    std::vector<TraceRow> design;
    design.reserve(static_cast<std::size_t>(span / step));
    for (Minutes t = origin - kMinutesPerDay; t < origin + span; t += step) {
        const Minutes slot = (t % kMinutesPerDay) / step;
        const double hour = static_cast<double>(t % kMinutesPerDay) / 60.0;
        TraceRow r;
        r.timestamp = t;
        r.tdb_c = design_max - 0.5 * range * (1.0 - std::cos(2.0 * std::numbers::pi * (hour - 15.0) / 24.0));
        r.twb_c = r.tdb_c;
        r.rh_pct = 50.0;
        r.solar_wm2 = solar[static_cast<std::size_t>(slot)];
        r.price_per_kwh = 1.0;
        r.occupancy = occupancy[static_cast<std::size_t>((iso_weekday(t) - 1) * slots_per_day + slot)];
        design.push_back(r);
    }

    EnvConfig sizing = config;
    sizing.building.plant_capacity_kw = 1e12;
    sizing.building.tes_volume_m3 = 0.0;
    BuildingEnv env(sizing, TraceSet(std::move(design), step));
    env.reset(origin, origin + 14 * kMinutesPerDay);
    double peak = 0.0;
    while (!env.done()) {
        const Minutes t = env.state().sim_clock;
        const StepResult r = env.step(config.building.design_setpoint_c, 1).front();
        if (t >= origin + 7 * kMinutesPerDay) peak = std::max(peak, r.q_cool_kw);
    }
    return config.building.sizing_factor * peak;
}

}  // namespace flexsac
