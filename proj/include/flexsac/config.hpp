#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flexsac/core.hpp"
#include "flexsac/env.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/nn.hpp"
#include "flexsac/reward.hpp"
#include "flexsac/time.hpp"
#include "flexsac/traces.hpp"

namespace flexsac {

inline constexpr int kConfigSchemaVersion = 1;

enum class DeploymentMode { Stochastic, Deterministic };

/// Everything needed to reproduce one training + evaluation run.
struct RunConfig {
    HyperParams hyperparams{};
    StateSpaceSet state_space_set = StateSpaceSet::SetII;
    int episodes = 50;
    Minutes episode_start = make_time(2017, 4, 1);
    Minutes episode_end = make_time(2017, 7, 1);
    Minutes eval_start = make_time(2017, 7, 3);  // first full work week of July
    Minutes eval_end = make_time(2017, 7, 8);
    Minutes sim_step_minutes = 15;
    Minutes control_step_minutes = 60;
    DeploymentMode deployment_mode = DeploymentMode::Deterministic;
    nn::Activation activation = nn::Activation::Relu;
    double reward_energy_scale = 2e4;  // see RewardWeights

    std::string trace_path;  // empty: synthetic traces
    SyntheticTraceParams synthetic{};

    OperatingSchedule schedule{};
    BuildingParams building{};
    ComfortSchedule comfort{};
    RbcParams rbc{};
    NormalizationTable normalization{};

    int hold_steps() const { return static_cast<int>(control_step_minutes / sim_step_minutes); }

    RewardWeights reward_weights() const {
        return {hyperparams.beta, hyperparams.lambda_comfort, reward_energy_scale};
    }

    /// Environment settings with the shared operating schedule applied.
    EnvConfig env_config() const {
        EnvConfig e;
        e.building = building;
        e.comfort = comfort;
        e.comfort.schedule = schedule;
        e.rbc = rbc;
        e.rbc.schedule = schedule;
        e.normalization = normalization;
        e.state_space = state_space_set;
        e.sim_step_minutes = sim_step_minutes;
        return e;
    }

    SyntheticTraceParams synthetic_params() const {
        SyntheticTraceParams p = synthetic;
        p.schedule = schedule;
        p.step_minutes = sim_step_minutes;
        return p;
    }

    void validate() const {
        hyperparams.validate();
        env_config().validate();
        if (episodes < 1) throw ConfigError("episodes must be >= 1");
        if (sim_step_minutes <= 0) throw ConfigError("sim_step_minutes must be > 0");
        if (control_step_minutes <= 0 || control_step_minutes % sim_step_minutes != 0) {
            throw ConfigError("control step must be a positive integer multiple of the sim step");
        }
        if (episode_end <= episode_start) throw ConfigError("episode_end must be after episode_start");
        if (eval_end <= eval_start) throw ConfigError("eval_end must be after eval_start");
        if ((episode_end - episode_start) % control_step_minutes != 0 ||
            (eval_end - eval_start) % control_step_minutes != 0) {
            throw ConfigError("episode and evaluation spans must be whole control steps");
        }
        if (!(reward_energy_scale > 0.0)) throw ConfigError("reward_energy_scale must be > 0");
    }
};

// ---------------------------------------------------------------------------
// Config file: INI with sections; unknown keys are rejected.
// ---------------------------------------------------------------------------

namespace detail {

struct ConfigField {
    std::string section;  // empty: top level
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline double parse_config_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e) throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
    return out;
}

template <typename Int>
Int parse_config_int(const std::string& key, const std::string& v) {
    Int out{};
    // Accept integral values written in exponent form (e.g. 2e6).
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec == std::errc{} && ptr == v.data() + v.size()) return out;
    const double d = parse_config_double(key, v);
    if (d != std::floor(d) || d < static_cast<double>(std::numeric_limits<Int>::min()) ||
        d > static_cast<double>(std::numeric_limits<Int>::max())) {
        throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
    }
    return static_cast<Int>(d);
}

inline std::vector<ConfigField> config_fields() {
    std::vector<ConfigField> f;
    auto num = [&f](std::string sec, std::string key, auto member) {
        const std::string full = sec + "." + key;
        f.push_back({sec, key, [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); },
                     [member, full](RunConfig& c, const std::string& v) { member(c) = parse_config_double(full, v); }});
    };
    auto integer = [&f](std::string sec, std::string key, auto member) {
        const std::string full = sec + "." + key;
        f.push_back({sec, key,
                     [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
                     [member, full](RunConfig& c, const std::string& v) {
                         using T = std::remove_reference_t<decltype(member(c))>;
                         member(c) = parse_config_int<T>(full, v);
                     }});
    };
    auto timestamp = [&f](std::string sec, std::string key, auto member) {
        f.push_back({sec, key, [member](const RunConfig& c) { return format_rfc3339(member(const_cast<RunConfig&>(c))); },
                     [member](RunConfig& c, const std::string& v) { member(c) = parse_rfc3339(v); }});
    };

    f.push_back({"", "schema_version", [](const RunConfig&) { return std::to_string(kConfigSchemaVersion); },
                 [](RunConfig&, const std::string& v) {
                     if (parse_config_int<int>("schema_version", v) != kConfigSchemaVersion) {
                         throw ConfigError("unsupported schema_version " + v);
                     }
                 }});

    // [run]
    f.push_back({"run", "state_space_set",
                 [](const RunConfig& c) { return std::to_string(static_cast<int>(c.state_space_set)); },
                 [](RunConfig& c, const std::string& v) {
                     c.state_space_set = state_space_from_int(parse_config_int<int>("run.state_space_set", v));
                 }});
    integer("run", "episodes", [](RunConfig& c) -> int& { return c.episodes; });
    timestamp("run", "episode_start", [](RunConfig& c) -> Minutes& { return c.episode_start; });
    timestamp("run", "episode_end", [](RunConfig& c) -> Minutes& { return c.episode_end; });
    timestamp("run", "eval_start", [](RunConfig& c) -> Minutes& { return c.eval_start; });
    timestamp("run", "eval_end", [](RunConfig& c) -> Minutes& { return c.eval_end; });
    integer("run", "sim_step_minutes", [](RunConfig& c) -> Minutes& { return c.sim_step_minutes; });
    integer("run", "control_step_minutes", [](RunConfig& c) -> Minutes& { return c.control_step_minutes; });
    f.push_back({"run", "deployment_mode",
                 [](const RunConfig& c) {
                     return std::string(c.deployment_mode == DeploymentMode::Stochastic ? "stochastic"
                                                                                         : "deterministic");
                 },
                 [](RunConfig& c, const std::string& v) {
                     if (v == "stochastic") {
                         c.deployment_mode = DeploymentMode::Stochastic;
                     } else if (v == "deterministic") {
                         c.deployment_mode = DeploymentMode::Deterministic;
                     } else {
                         throw ConfigError("run.deployment_mode must be stochastic or deterministic");
                     }
                 }});
    f.push_back({"run", "activation",
                 [](const RunConfig& c) {
                     return std::string(c.activation == nn::Activation::Tanh ? "tanh" : "relu");
                 },
                 [](RunConfig& c, const std::string& v) {
                     if (v == "relu") {
                         c.activation = nn::Activation::Relu;
                     } else if (v == "tanh") {
                         c.activation = nn::Activation::Tanh;
                     } else {
                         throw ConfigError("run.activation must be relu or tanh");
                     }
                 }});

    // [sac]
    num("sac", "gamma", [](RunConfig& c) -> double& { return c.hyperparams.gamma; });
    num("sac", "alpha", [](RunConfig& c) -> double& { return c.hyperparams.alpha; });
    num("sac", "lambda_comfort", [](RunConfig& c) -> double& { return c.hyperparams.lambda_comfort; });
    num("sac", "beta", [](RunConfig& c) -> double& { return c.hyperparams.beta; });
    num("sac", "learning_rate", [](RunConfig& c) -> double& { return c.hyperparams.learning_rate; });
    num("sac", "tau", [](RunConfig& c) -> double& { return c.hyperparams.tau; });
    integer("sac", "buffer_capacity", [](RunConfig& c) -> std::int64_t& { return c.hyperparams.buffer_capacity; });
    integer("sac", "minibatch_size", [](RunConfig& c) -> std::int64_t& { return c.hyperparams.minibatch_size; });
    integer("sac", "update_interval_sim_steps",
            [](RunConfig& c) -> std::int64_t& { return c.hyperparams.update_interval_sim_steps; });
    integer("sac", "gradient_steps_per_update",
            [](RunConfig& c) -> std::int64_t& { return c.hyperparams.gradient_steps_per_update; });
    integer("sac", "hidden_size", [](RunConfig& c) -> std::int64_t& { return c.hyperparams.hidden_size; });
    integer("sac", "warmup_random_control_steps",
            [](RunConfig& c) -> std::int64_t& { return c.hyperparams.warmup_random_control_steps; });
    integer("sac", "seed", [](RunConfig& c) -> std::uint64_t& { return c.hyperparams.seed; });

    // [reward]
    num("reward", "energy_scale", [](RunConfig& c) -> double& { return c.reward_energy_scale; });

    // [traces]
    f.push_back({"traces", "path", [](const RunConfig& c) { return c.trace_path; },
                 [](RunConfig& c, const std::string& v) { c.trace_path = v; }});
    timestamp("traces", "synthetic_start", [](RunConfig& c) -> Minutes& { return c.synthetic.start; });
    integer("traces", "synthetic_days", [](RunConfig& c) -> int& { return c.synthetic.days; });
    integer("traces", "climate_zone", [](RunConfig& c) -> int& { return c.synthetic.climate_zone; });
    integer("traces", "synthetic_seed", [](RunConfig& c) -> std::uint64_t& { return c.synthetic.seed; });
    num("traces", "daily_noise_c", [](RunConfig& c) -> double& { return c.synthetic.daily_noise_c; });
    num("traces", "night_price", [](RunConfig& c) -> double& { return c.synthetic.night_price; });
    num("traces", "day_price", [](RunConfig& c) -> double& { return c.synthetic.day_price; });
    integer("traces", "day_price_start_hour", [](RunConfig& c) -> int& { return c.synthetic.day_price_start_hour; });
    integer("traces", "day_price_end_hour", [](RunConfig& c) -> int& { return c.synthetic.day_price_end_hour; });

    // [schedule]
    integer("schedule", "weekday_open_hour", [](RunConfig& c) -> int& { return c.schedule.weekday_open_hour; });
    integer("schedule", "weekday_close_hour", [](RunConfig& c) -> int& { return c.schedule.weekday_close_hour; });
    integer("schedule", "saturday_open_hour", [](RunConfig& c) -> int& { return c.schedule.saturday_open_hour; });
    integer("schedule", "saturday_close_hour", [](RunConfig& c) -> int& { return c.schedule.saturday_close_hour; });

    // [comfort]
    num("comfort", "occupied_min", [](RunConfig& c) -> double& { return c.comfort.occupied_min; });
    num("comfort", "occupied_max", [](RunConfig& c) -> double& { return c.comfort.occupied_max; });
    num("comfort", "unoccupied_min", [](RunConfig& c) -> double& { return c.comfort.unoccupied_min; });
    num("comfort", "unoccupied_max", [](RunConfig& c) -> double& { return c.comfort.unoccupied_max; });

    // [rbc]
    num("rbc", "occupied_setpoint", [](RunConfig& c) -> double& { return c.rbc.occupied_setpoint_c; });
    num("rbc", "setback_setpoint", [](RunConfig& c) -> double& { return c.rbc.setback_setpoint_c; });

    // [building]
    num("building", "floor_area_m2", [](RunConfig& c) -> double& { return c.building.floor_area_m2; });
    num("building", "u_value_w_m2k", [](RunConfig& c) -> double& { return c.building.u_value_w_m2k; });
    num("building", "envelope_area_m2", [](RunConfig& c) -> double& { return c.building.envelope_area_m2; });
    num("building", "infiltration_w_k", [](RunConfig& c) -> double& { return c.building.infiltration_w_k; });
    num("building", "ventilation_w_k", [](RunConfig& c) -> double& { return c.building.ventilation_w_k; });
    num("building", "air_capacitance_j_k", [](RunConfig& c) -> double& { return c.building.rc.air_capacitance; });
    num("building", "mass_capacitance_j_k", [](RunConfig& c) -> double& { return c.building.rc.mass_capacitance; });
    num("building", "air_mass_conductance_w_k",
        [](RunConfig& c) -> double& { return c.building.rc.air_mass_conductance; });
    num("building", "people_gain_w_m2", [](RunConfig& c) -> double& { return c.building.people_gain_w_m2; });
    num("building", "equipment_power_w_m2", [](RunConfig& c) -> double& { return c.building.equipment_power_w_m2; });
    num("building", "base_power_w_m2", [](RunConfig& c) -> double& { return c.building.base_power_w_m2; });
    num("building", "radiant_fraction", [](RunConfig& c) -> double& { return c.building.radiant_fraction; });
    num("building", "solar_aperture_m2", [](RunConfig& c) -> double& { return c.building.solar_aperture_m2; });
    num("building", "cop", [](RunConfig& c) -> double& { return c.building.cop; });
    num("building", "plant_capacity_kw", [](RunConfig& c) -> double& { return c.building.plant_capacity_kw; });
    num("building", "sizing_factor", [](RunConfig& c) -> double& { return c.building.sizing_factor; });
    num("building", "design_setpoint_c", [](RunConfig& c) -> double& { return c.building.design_setpoint_c; });
    num("building", "tes_volume_m3", [](RunConfig& c) -> double& { return c.building.tes_volume_m3; });
    num("building", "tes_delta_t_k", [](RunConfig& c) -> double& { return c.building.tes_delta_t_k; });
    num("building", "tes_cold_c", [](RunConfig& c) -> double& { return c.building.tes_cold_c; });
    num("building", "tes_charge_kw", [](RunConfig& c) -> double& { return c.building.tes_charge_kw; });
    num("building", "tes_discharge_kw", [](RunConfig& c) -> double& { return c.building.tes_discharge_kw; });
    num("building", "tes_cop", [](RunConfig& c) -> double& { return c.building.tes_cop; });
    num("building", "tes_initial_soc", [](RunConfig& c) -> double& { return c.building.tes_initial_soc; });
    num("building", "initial_zone_c", [](RunConfig& c) -> double& { return c.building.initial_zone_c; });
    num("building", "initial_mass_c", [](RunConfig& c) -> double& { return c.building.initial_mass_c; });

    // [normalization]
    auto norm = [&num](const std::string& name, NormalizationSpec NormalizationTable::*spec) {
        num("normalization", name + "_min", [spec](RunConfig& c) -> double& { return (c.normalization.*spec).min; });
        num("normalization", name + "_max", [spec](RunConfig& c) -> double& { return (c.normalization.*spec).max; });
    };
    norm("price", &NormalizationTable::price);
    norm("hvac_kw", &NormalizationTable::hvac_kw);
    norm("total_kw", &NormalizationTable::total_kw);
    norm("t_zone", &NormalizationTable::t_zone);
    norm("day_of_week", &NormalizationTable::day_of_week);
    norm("hour_of_day", &NormalizationTable::hour_of_day);
    norm("tdb", &NormalizationTable::tdb);
    norm("twb", &NormalizationTable::twb);
    norm("wind", &NormalizationTable::wind);
    norm("wind_deg", &NormalizationTable::wind_deg);
    norm("rh", &NormalizationTable::rh);
    norm("solar", &NormalizationTable::solar);
    norm("tes_tank", &NormalizationTable::tes_tank);
    norm("occupancy", &NormalizationTable::occupancy);
    return f;
}

}  // namespace detail

/// Sets one value by dotted key ("sac.gamma", "run.episodes", ...). Used for
/// CLI overrides.
inline void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    const std::string section = dot == std::string::npos ? "" : dotted_key.substr(0, dot);
    const std::string key = dot == std::string::npos ? dotted_key : dotted_key.substr(dot + 1);
    for (const auto& f : detail::config_fields()) {
        if (f.section == section && f.key == key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + dotted_key + "'");
}

inline std::string get_config_value(const RunConfig& cfg, const std::string& dotted_key) {
    const auto dot = dotted_key.find('.');
    const std::string section = dot == std::string::npos ? "" : dotted_key.substr(0, dot);
    const std::string key = dot == std::string::npos ? dotted_key : dotted_key.substr(dot + 1);
    for (const auto& f : detail::config_fields()) {
        if (f.section == section && f.key == key) return f.get(cfg);
    }
    throw ConfigError("unknown config key '" + dotted_key + "'");
}

inline RunConfig parse_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    const auto fields = detail::config_fields();
    std::map<std::string, std::map<std::string, const detail::ConfigField*>> index;
    for (const auto& f : fields) index[f.section][f.key] = &f;

    if (tree.find("schema_version") == tree.not_found()) throw ConfigError("config is missing schema_version");

    RunConfig cfg;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            const auto it = index[""].find(name);
            if (it == index[""].end()) throw ConfigError("unknown config key '" + name + "'");
            it->second->set(cfg, node.data());
            continue;
        }
        const auto sec = index.find(name);
        if (name.empty() || sec == index.end()) throw ConfigError("unknown config section [" + name + "]");
        for (const auto& [key, leaf] : node) {
            const auto it = sec->second.find(key);
            if (it == sec->second.end()) throw ConfigError("unknown config key '" + name + "." + key + "'");
            it->second->set(cfg, leaf.data());
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline void write_config(std::ostream& out, const RunConfig& cfg) {
    std::string section = "\x01";
    for (const auto& f : detail::config_fields()) {
        if (f.section != section) {
            section = f.section;
            if (!section.empty()) out << "\n[" << section << "]\n";
        }
        out << f.key << " = " << f.get(cfg) << '\n';
    }
}

inline std::string config_to_string(const RunConfig& cfg) {
    std::ostringstream os;
    write_config(os, cfg);
    return os.str();
}

inline void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    write_config(out, cfg);
}

}  // namespace flexsac
