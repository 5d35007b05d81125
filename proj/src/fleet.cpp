#include "prosim/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "csv_util.hpp"

namespace prosim {

using namespace std::chrono;

CapacityClass classify_pv(double kwp) {
    if (kwp < 0.5) return CapacityClass::none;
    if (kwp < 4.0) return CapacityClass::S;
    if (kwp < 8.0) return CapacityClass::M;
    if (kwp < 12.0) return CapacityClass::L;
    return CapacityClass::XL;
}

CapacityClass classify_battery(double kwh) {
    if (kwh < 0.5) return CapacityClass::none;
    if (kwh < 10.0) return CapacityClass::S;
    if (kwh < 20.0) return CapacityClass::M;
    if (kwh < 30.0) return CapacityClass::L;
    return CapacityClass::XL;
}

StageLabel classify_stage(double avg_pv_kwp, double avg_battery_kwh) {
    if (!(avg_pv_kwp >= 0.0) || !(avg_battery_kwh >= 0.0))
        throw std::invalid_argument("classify_stage: averages must be non-negative");
    return {classify_pv(avg_pv_kwp), classify_battery(avg_battery_kwh)};
}

namespace {

const char* class_suffix(CapacityClass c) {
    switch (c) {
        case CapacityClass::S: return "S";
        case CapacityClass::M: return "M";
        case CapacityClass::L: return "L";
        case CapacityClass::XL: return "XL";
        case CapacityClass::none: break;
    }
    return "";
}

}  // namespace

std::string StageLabel::name() const {
    if (pv == CapacityClass::none) return "-";
    std::string s = std::string("PV_") + class_suffix(pv);
    if (battery != CapacityClass::none) s += std::string(":B_") + class_suffix(battery);
    return s;
}

Season season_of(month m) {
    const unsigned v = static_cast<unsigned>(m);
    if (v == 12 || v <= 2) return Season::summer;
    if (v <= 5) return Season::autumn;
    if (v <= 8) return Season::winter;
    return Season::spring;
}

const char* season_name(Season s) {
    switch (s) {
        case Season::summer: return "Summer";
        case Season::autumn: return "Autumn";
        case Season::winter: return "Winter";
        case Season::spring: return "Spring";
    }
    return "?";
}

void AggregateProfile::add_residual(std::span<const double> residual_kwh) {
    if (net_kw.empty()) net_kw.assign(residual_kwh.size(), 0.0);
    if (residual_kwh.size() != net_kw.size()) throw std::invalid_argument("aggregate: mismatched series lengths");
    for (std::size_t i = 0; i < net_kw.size(); ++i) net_kw[i] += energy_to_power(residual_kwh[i]);
}

AggregateProfile aggregate(std::span<const std::vector<double>> residuals, Date start_date, int year,
                           std::string scenario) {
    AggregateProfile p;
    p.start_date = start_date;
    p.year = year;
    p.scenario = std::move(scenario);
    for (const auto& r : residuals) p.add_residual(r);
    return p;
}

AggregateProfile underlying_profile(const FleetDataset& dataset) {
    AggregateProfile p;
    p.scenario = "underlying";
    if (dataset.households.empty()) return p;
    p.start_date = dataset.households.front().start_date;
    for (const auto& h : dataset.households) p.add_residual(h.demand);
    return p;
}

std::string clock_label(std::size_t interval_of_day) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u:%02u", static_cast<unsigned>(interval_of_day / 2 % 24),
                  static_cast<unsigned>(interval_of_day % 2 * 30));
    return buf;
}

YearMetrics compute_metrics(const AggregateProfile& profile, const AggregateProfile& underlying) {
    const auto& p = profile.net_kw;
    const std::size_t n = p.size();
    if (n == 0 || n % kIntervalsPerDay != 0) throw std::invalid_argument("compute_metrics: profile must cover whole days");
    if (underlying.net_kw.size() != n) throw std::invalid_argument("compute_metrics: underlying grid differs");

    YearMetrics m;
    m.days = n / kIntervalsPerDay;
    double underlying_imports = 0.0;
    for (double kw : underlying.net_kw)
        if (kw > 0.0) underlying_imports += power_to_energy(kw);

    double imports = 0.0, exports = 0.0;
    std::array<double, 12> monthly{};
    for (std::size_t i = 0; i < n; ++i) {
        const double kwh = power_to_energy(p[i]);
        if (kwh > 0.0) {
            imports += kwh;
            const year_month_day ymd{floor<days>(interval_start(profile.start_date, i))};
            monthly[static_cast<unsigned>(ymd.month()) - 1] += kwh;
        } else {
            exports -= kwh;
        }
    }
    m.imports_mwh = imports / 1000.0;
    m.exports_mwh = exports / 1000.0;
    for (std::size_t k = 0; k < 12; ++k) m.monthly_imports_mwh[k] = monthly[k] / 1000.0;
    m.grid_dependency = underlying_imports > 0.0 ? imports / underlying_imports : 0.0;

    const auto peak = std::max_element(p.begin(), p.end());
    const auto peak_idx = static_cast<std::size_t>(peak - p.begin());
    m.peak_demand_kw = std::max(*peak, 0.0);
    m.peak_time = interval_start(profile.start_date, peak_idx);
    m.peak_season = season_of(year_month_day{floor<days>(m.peak_time)}.month());

    const double trough = *std::min_element(p.begin(), p.end());
    m.peak_feed_in_kw = std::max(-trough, 0.0);
    const double underlying_peak = *std::max_element(underlying.net_kw.begin(), underlying.net_kw.end());
    m.peak_feed_in_share = underlying_peak > 0.0 ? m.peak_feed_in_kw / underlying_peak : 0.0;

    for (std::size_t d = 0; d < m.days; ++d) {
        const auto first = p.begin() + static_cast<std::ptrdiff_t>(d * kIntervalsPerDay);
        const auto last = first + static_cast<std::ptrdiff_t>(kIntervalsPerDay);
        // ties resolve to the earliest interval
        m.peak_timing_pct[static_cast<std::size_t>(std::max_element(first, last) - first)] += 1.0;
        m.minimum_timing_pct[static_cast<std::size_t>(std::min_element(first, last) - first)] += 1.0;
    }
    for (auto* hist : {&m.peak_timing_pct, &m.minimum_timing_pct})
        for (auto& v : *hist) v = 100.0 * v / static_cast<double>(m.days);

    m.ramp_duration_kw_per_min.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) m.ramp_duration_kw_per_min.push_back((p[i + 1] - p[i]) / 30.0);
    if (!m.ramp_duration_kw_per_min.empty()) {
        const auto [lo, hi] = std::minmax_element(m.ramp_duration_kw_per_min.begin(), m.ramp_duration_kw_per_min.end());
        m.peak_ramp_up_kw_per_min = *hi;
        m.peak_ramp_down_kw_per_min = *lo;
    }
    std::sort(m.ramp_duration_kw_per_min.begin(), m.ramp_duration_kw_per_min.end(), std::greater<>());
    m.load_duration_kw = p;
    std::sort(m.load_duration_kw.begin(), m.load_duration_kw.end(), std::greater<>());
    return m;
}

double window_share(std::span<const double, kIntervalsPerDay> hist, int from_minutes, int to_minutes) {
    double total = 0.0;
    for (std::size_t b = 0; b < kIntervalsPerDay; ++b) {
        const int start = static_cast<int>(b) * 30;
        const int end = start + 30;
        const bool inside = from_minutes <= to_minutes ? (start >= from_minutes && end <= to_minutes)
                                                       : (start >= from_minutes || end <= to_minutes);
        if (inside) total += hist[b];
    }
    return total;
}

std::vector<double> scale_to_population(const AggregateProfile& profile, const AggregateProfile& underlying,
                                        double sample_size, double population, std::span<const double> system_kw) {
    if (!(sample_size > 0.0)) throw std::invalid_argument("scale_to_population: sample_size must be positive");
    const std::size_t n = system_kw.size();
    if (profile.net_kw.size() != n || underlying.net_kw.size() != n)
        throw std::invalid_argument("scale_to_population: length mismatch");
    const double scale = population / sample_size;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = system_kw[i] + (profile.net_kw[i] - underlying.net_kw[i]) * scale;
    return out;
}

namespace {

const char* const kMonthNames[12] = {"jan", "feb", "mar", "apr", "may", "jun",
                                     "jul", "aug", "sep", "oct", "nov", "dec"};

std::size_t mode_bin(const std::array<double, kIntervalsPerDay>& h) {
    return static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
}

}  // namespace

void write_metrics_header(std::ostream& out) {
    out << "scenario,year,calendar_year,avg_pv_kwp,avg_battery_kwh,stage,imports_mwh,grid_dependency,"
           "peak_demand_kw,peak_season,peak_time,exports_mwh,peak_feed_in_kw,peak_feed_in_share,"
           "peak_timing_mode,minimum_timing_mode,peak_ramp_up_kw_per_min,peak_ramp_down_kw_per_min";
    for (const char* m : kMonthNames) out << ",imports_" << m << "_mwh";
    out << '\n';
}

void write_metrics_row(std::ostream& out, const FleetYearReport& r) {
    using detail::format_double;
    const auto& m = r.metrics;
    out << r.scenario << ',' << r.year << ',' << r.calendar_year << ',' << format_double(r.avg_pv_kwp) << ','
        << format_double(r.avg_battery_kwh) << ',' << r.stage.name() << ',' << format_double(m.imports_mwh) << ','
        << format_double(m.grid_dependency) << ',' << format_double(m.peak_demand_kw) << ','
        << season_name(m.peak_season) << ',' << format_timestamp(m.peak_time) << ',' << format_double(m.exports_mwh)
        << ',' << format_double(m.peak_feed_in_kw) << ',' << format_double(m.peak_feed_in_share) << ','
        << clock_label(mode_bin(m.peak_timing_pct)) << ',' << clock_label(mode_bin(m.minimum_timing_pct)) << ','
        << format_double(m.peak_ramp_up_kw_per_min) << ',' << format_double(m.peak_ramp_down_kw_per_min);
    for (double v : m.monthly_imports_mwh) out << ',' << format_double(v);
    out << '\n';
}

void write_curves_header(std::ostream& out) { out << "scenario,calendar_year,curve,index,label,value\n"; }

void write_curves(std::ostream& out, const FleetYearReport& r) {
    using detail::format_double;
    const auto& m = r.metrics;
    auto row = [&](const char* curve, std::size_t i, const std::string& label, double v) {
        out << r.scenario << ',' << r.calendar_year << ',' << curve << ',' << i << ',' << label << ','
            << format_double(v) << '\n';
    };
    for (std::size_t b = 0; b < kIntervalsPerDay; ++b) row("peak_timing_pct", b, clock_label(b), m.peak_timing_pct[b]);
    for (std::size_t b = 0; b < kIntervalsPerDay; ++b)
        row("minimum_timing_pct", b, clock_label(b), m.minimum_timing_pct[b]);
    for (std::size_t k = 0; k < 12; ++k) row("monthly_imports_mwh", k, kMonthNames[k], m.monthly_imports_mwh[k]);
    for (std::size_t k = 0; k < m.load_duration_kw.size(); ++k) row("load_duration_kw", k, "", m.load_duration_kw[k]);
    for (std::size_t k = 0; k < m.ramp_duration_kw_per_min.size(); ++k)
        row("ramp_duration_kw_per_min", k, "", m.ramp_duration_kw_per_min[k]);
}

}  // namespace prosim
