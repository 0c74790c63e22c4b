#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flexsac/core.hpp"
#include "flexsac/errors.hpp"
#include "flexsac/time.hpp"

namespace flexsac {

/// One row of boundary conditions at simulation resolution.
struct TraceRow {
    Minutes timestamp = 0;
    double tdb_c = 0.0;
    double twb_c = 0.0;
    double rh_pct = 0.0;
    double wind_mps = 0.0;
    double wind_deg = 0.0;
    double solar_wm2 = 0.0;
    double price_per_kwh = 0.0;
    double occupancy = 0.0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

inline constexpr std::string_view kTraceCsvHeader =
    "timestamp,tdb_c,twb_c,rh_pct,wind_mps,wind_deg,solar_wm2,price_per_kwh,occupancy";

/// Weather, price and occupancy on a fixed cadence with no gaps.
class TraceSet {
public:
    TraceSet() = default;

    TraceSet(std::vector<TraceRow> rows, Minutes step_minutes = 15) : rows_(std::move(rows)), step_(step_minutes) {
        validate();
    }

    const std::vector<TraceRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    Minutes step_minutes() const noexcept { return step_; }

    Minutes start() const { return rows_.empty() ? 0 : rows_.front().timestamp; }
    /// One past the last covered instant.
    Minutes end() const { return rows_.empty() ? 0 : rows_.back().timestamp + step_; }

    bool covers(Minutes t) const { return !rows_.empty() && t >= start() && t < end(); }

    const TraceRow& at(Minutes t) const {
        if (!covers(t)) throw TraceError("trace has no row for " + format_rfc3339(t));
        const auto offset = t - start();
        if (offset % step_ != 0) throw TraceError("timestamp " + format_rfc3339(t) + " is off the trace cadence");
        return rows_[static_cast<std::size_t>(offset / step_)];
    }

    /// Throws naming the first timestamp in [from, to) that is not covered.
    void require(Minutes from, Minutes to) const {
        if (rows_.empty()) throw TraceError("trace is empty; first missing timestamp " + format_rfc3339(from));
        if (from < start()) throw TraceError("trace gap: first missing timestamp " + format_rfc3339(from));
        if (to > end()) {
            throw TraceError("trace gap: first missing timestamp " + format_rfc3339(std::max(end(), from)));
        }
    }

    void validate() const {
        if (step_ <= 0) throw TraceError("trace step must be positive");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const TraceRow& r = rows_[i];
            if (i > 0) {
                const Minutes prev = rows_[i - 1].timestamp;
                if (r.timestamp <= prev) {
                    throw TraceError("timestamps not strictly increasing at " + format_rfc3339(r.timestamp));
                }
                if (r.timestamp != prev + step_) {
                    throw TraceError("trace gap: first missing timestamp " + format_rfc3339(prev + step_));
                }
            }
            for (double v : {r.tdb_c, r.twb_c, r.rh_pct, r.wind_mps, r.wind_deg, r.solar_wm2, r.price_per_kwh,
                             r.occupancy}) {
                if (!std::isfinite(v)) throw TraceError("non-finite value at " + format_rfc3339(r.timestamp));
            }
            if (!(r.price_per_kwh > 0.0)) {
                throw TraceError("price must be > 0 at " + format_rfc3339(r.timestamp));
            }
            if (r.occupancy < 0.0 || r.occupancy > 1.0) {
                throw TraceError("occupancy outside [0,1] at " + format_rfc3339(r.timestamp));
            }
        }
    }

    /// Rows in [from, to) as a new trace.
    TraceSet slice(Minutes from, Minutes to) const {
        require(from, to);
        const auto first = static_cast<std::size_t>((from - start()) / step_);
        const auto last = static_cast<std::size_t>((to - start()) / step_);
        return TraceSet(std::vector<TraceRow>(rows_.begin() + first, rows_.begin() + last), step_);
    }

private:
    std::vector<TraceRow> rows_;
    Minutes step_ = 15;
};

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view field, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double v = 0.0;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("cannot parse number '" + std::string(field) + "'", line);
    }
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

inline TraceSet parse_traces(std::istream& in, Minutes step_minutes = 15) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty trace file, header required", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader) {
        throw ParseError("bad header, expected '" + std::string(kTraceCsvHeader) + "'", lineno);
    }
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 9) {
            throw ParseError("expected 9 fields, got " + std::to_string(fields.size()), lineno);
        }
        TraceRow r;
        try {
            r.timestamp = parse_rfc3339(fields[0]);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), lineno);
        }
        r.tdb_c = detail::parse_double(fields[1], lineno);
        r.twb_c = detail::parse_double(fields[2], lineno);
        r.rh_pct = detail::parse_double(fields[3], lineno);
        r.wind_mps = detail::parse_double(fields[4], lineno);
        r.wind_deg = detail::parse_double(fields[5], lineno);
        r.solar_wm2 = detail::parse_double(fields[6], lineno);
        r.price_per_kwh = detail::parse_double(fields[7], lineno);
        r.occupancy = detail::parse_double(fields[8], lineno);
        rows.push_back(r);
    }
    return TraceSet(std::move(rows), step_minutes);
}

inline TraceSet load_traces(const std::string& path, Minutes step_minutes = 15) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file '" + path + "'");
    return parse_traces(in, step_minutes);
}

inline void write_traces(std::ostream& out, const TraceSet& traces) {
    out << kTraceCsvHeader << '\n';
    for (const TraceRow& r : traces.rows()) {
        out << format_rfc3339(r.timestamp);
        for (double v : {r.tdb_c, r.twb_c, r.rh_pct, r.wind_mps, r.wind_deg, r.solar_wm2, r.price_per_kwh,
                         r.occupancy}) {
            out << ',' << detail::format_double(v);
        }
        out << '\n';
    }
}

inline std::string traces_to_csv(const TraceSet& traces) {
    std::ostringstream os;
    write_traces(os, traces);
    return os.str();
}

inline void save_traces(const std::string& path, const TraceSet& traces) {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot write trace file '" + path + "'");
    write_traces(out, traces);
}

// ---------------------------------------------------------------------------
// Operating schedule
// ---------------------------------------------------------------------------

/// Building operating hours: weekdays 06:00-24:00, Saturday 06:00-17:00,
/// closed Sunday. Used by the occupancy generator, the comfort band and the
/// rule-based controller.
struct OperatingSchedule {
    int weekday_open_hour = 6;
    int weekday_close_hour = 24;
    int saturday_open_hour = 6;
    int saturday_close_hour = 17;

    bool is_open(Minutes t) const {
        const int dow = iso_weekday(t);
        const int h = hour_of_day(t);
        if (dow <= 5) return h >= weekday_open_hour && h < weekday_close_hour;
        if (dow == 6) return h >= saturday_open_hour && h < saturday_close_hour;
        return false;
    }

    friend bool operator==(const OperatingSchedule&, const OperatingSchedule&) = default;
};

// ---------------------------------------------------------------------------
// Synthetic traces
// ---------------------------------------------------------------------------

/// Climate stand-ins for the nine ASHRAE zones (0 Darwin ... 8 Fairbanks).
/// Annual sinusoid of daily-mean drybulb peaking mid July (negative
/// amplitude for the southern hemisphere), plus a diurnal cosine.
struct ClimateProfile {
    int zone = 3;
    const char* name = "Rome";
    double annual_mean_c = 16.0;
    double annual_amplitude_c = 8.0;
    double diurnal_amplitude_c = 5.5;
    double rh_mean_pct = 65.0;
    double solar_peak_wm2 = 800.0;
};

inline const std::array<ClimateProfile, 9>& climate_profiles() {
    static const std::array<ClimateProfile, 9> k{{
        {0, "Darwin", 27.5, -2.5, 5.5, 60.0, 800.0},
        {1, "Miami", 25.0, 3.5, 4.0, 75.0, 780.0},
        {2, "Cairo", 22.0, 7.0, 7.0, 50.0, 880.0},
        {3, "Rome", 16.0, 8.0, 5.5, 65.0, 800.0},
        {4, "Vancouver", 10.5, 7.0, 4.5, 70.0, 720.0},
        {5, "Dublin", 10.0, 5.0, 4.0, 80.0, 650.0},
        {6, "Datong", 7.0, 15.0, 7.0, 55.0, 820.0},
        {7, "Tampere", 4.5, 12.0, 5.0, 70.0, 650.0},
        {8, "Fairbanks", -2.5, 19.0, 6.0, 60.0, 620.0},
    }};
    return k;
}

inline const ClimateProfile& climate_profile(int zone) {
    if (zone < 0 || zone > 8) throw ConfigError("climate zone must be 0..8");
    return climate_profiles()[static_cast<std::size_t>(zone)];
}

struct SyntheticTraceParams {
    Minutes start = make_time(2017, 3, 31);
    int days = 169;  // through 2017-09-15
    Minutes step_minutes = 15;
    int climate_zone = 3;
    std::uint64_t seed = 2017;
    double daily_noise_c = 1.5;  // std of the AR(1) day-to-day drybulb offset
    double night_price = 0.04;
    double day_price = 0.10;
    int day_price_start_hour = 8;
    int day_price_end_hour = 20;
    OperatingSchedule schedule{};

    friend bool operator==(const SyntheticTraceParams&, const SyntheticTraceParams&) = default;
};

/// Stull's empirical wet-bulb approximation (valid roughly 5-99 %RH).
inline double wetbulb_stull(double tdb_c, double rh_pct) {
    const double rh = std::clamp(rh_pct, 5.0, 99.0);
    return tdb_c * std::atan(0.151977 * std::sqrt(rh + 8.313659)) + std::atan(tdb_c + rh) -
           std::atan(rh - 1.676331) + 0.00391838 * std::pow(rh, 1.5) * std::atan(0.023101 * rh) - 4.686035;
}

/// Occupancy fraction on the operating schedule: full during core hours,
/// partial at the shoulders, zero when closed.
inline double synthetic_occupancy(Minutes t, const OperatingSchedule& schedule) {
    if (!schedule.is_open(t)) return 0.0;
    const int h = hour_of_day(t);
    if (iso_weekday(t) == 6) return 0.4;
    if (h < 8) return 0.5;
    if (h < 18) return 1.0;
    if (h < 22) return 0.5;
    return 0.2;
}

inline TraceSet generate_synthetic_traces(const SyntheticTraceParams& p) {
    if (p.days < 1) throw ConfigError("synthetic trace needs at least one day");
    if (p.step_minutes <= 0 || kMinutesPerDay % p.step_minutes != 0) {
        throw ConfigError("synthetic step must divide one day");
    }
    if (!(p.night_price > 0.0 && p.day_price > 0.0)) throw ConfigError("synthetic prices must be > 0");
    const ClimateProfile& climate = climate_profile(p.climate_zone);
    Rng rng = Rng::substream(p.seed, "traces");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    const Minutes steps_per_day = kMinutesPerDay / p.step_minutes;
    std::vector<TraceRow> rows;
    rows.reserve(static_cast<std::size_t>(p.days * steps_per_day));

    double offset = 0.0;
    double wind_dir = rng.uniform(0.0, 360.0);
    for (int d = 0; d < p.days; ++d) {
        offset = 0.7 * offset + std::sqrt(1.0 - 0.49) * p.daily_noise_c * rng.normal();
        const double cloud = std::clamp(1.0 - 0.35 * std::abs(rng.normal()), 0.2, 1.0);
        const double wind_base = std::max(0.5, 3.0 + 1.2 * rng.normal());
        const Minutes day_start = p.start + d * kMinutesPerDay;
        const CivilTime civil = to_civil(day_start);
        const Minutes jan1 = make_time(civil.year, 1, 1);
        const double doy = static_cast<double>((day_start - jan1) / kMinutesPerDay);
        // Daily means peak around 16 July (day-of-year 197).
        const double daily_mean =
            climate.annual_mean_c - climate.annual_amplitude_c * std::cos(two_pi * (doy - 15.0) / 365.0) + offset;
        const double solar_season = 0.75 + 0.25 * std::cos(two_pi * (doy - 172.0) / 365.0) *
                                               (climate.annual_amplitude_c >= 0.0 ? 1.0 : -1.0);
        for (Minutes s = 0; s < steps_per_day; ++s) {
            const Minutes t = day_start + s * p.step_minutes;
            const double hour = static_cast<double>(s * p.step_minutes) / 60.0;
            const double diurnal = std::cos(two_pi * (hour - 15.0) / 24.0);
            TraceRow r;
            r.timestamp = t;
            r.tdb_c = daily_mean + climate.diurnal_amplitude_c * diurnal;
            r.rh_pct = std::clamp(climate.rh_mean_pct - 15.0 * diurnal, 10.0, 100.0);
            r.twb_c = wetbulb_stull(r.tdb_c, r.rh_pct);
            r.wind_mps = std::max(0.0, wind_base * (1.0 + 0.3 * diurnal));
            wind_dir = std::fmod(wind_dir + 5.0 * rng.normal() + 360.0, 360.0);
            r.wind_deg = wind_dir;
            const double sun = std::sin(std::numbers::pi * (hour - 6.0) / 14.0);
            r.solar_wm2 = (hour >= 6.0 && hour <= 20.0) ? climate.solar_peak_wm2 * solar_season * cloud * sun : 0.0;
            r.solar_wm2 = std::max(0.0, r.solar_wm2);
            const int h = hour_of_day(t);
            r.price_per_kwh = (h >= p.day_price_start_hour && h < p.day_price_end_hour) ? p.day_price : p.night_price;
            r.occupancy = synthetic_occupancy(t, p.schedule);
            rows.push_back(r);
        }
    }
    return TraceSet(std::move(rows), p.step_minutes);
}

}  // namespace flexsac
