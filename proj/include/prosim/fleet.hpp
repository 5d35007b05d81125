#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prosim/profiles.hpp"

namespace prosim {

enum class CapacityClass { none, S, M, L, XL };

/// Grid-operation stage from average per-household PV and battery capacity.
struct StageLabel {
    CapacityClass pv = CapacityClass::none;
    CapacityClass battery = CapacityClass::none;

    /// "PV_M:B_S", "PV_S", or "-" when no PV class applies.
    std::string name() const;
    friend bool operator==(const StageLabel&, const StageLabel&) = default;
};

/// Lower-inclusive bins: none < 0.5, S [0.5, 4), M [4, 8), L [8, 12), XL >= 12 kW_P;
/// battery none < 0.5, S [0.5, 10), M [10, 20), L [20, 30), XL >= 30 kWh.
StageLabel classify_stage(double avg_pv_kwp, double avg_battery_kwh);
CapacityClass classify_pv(double avg_pv_kwp);
CapacityClass classify_battery(double avg_battery_kwh);

enum class Season { summer, autumn, winter, spring };
/// Southern-hemisphere meteorological seasons.
Season season_of(std::chrono::month m);
const char* season_name(Season s);

/// Net fleet grid power per interval: positive import, negative export (kW).
struct AggregateProfile {
    std::vector<double> net_kw;
    Date start_date{};
    int year = 0;
    std::string scenario;

    void add_residual(std::span<const double> residual_kwh);
};

/// Interval-wise sum of household residuals (kWh), converted to kW.
AggregateProfile aggregate(std::span<const std::vector<double>> residuals_kwh, Date start_date, int year = 0,
                           std::string scenario = {});

/// Fleet underlying demand (no PV, no battery).
AggregateProfile underlying_profile(const FleetDataset& dataset);

struct YearMetrics {
    double imports_mwh = 0.0;
    double exports_mwh = 0.0;
    double grid_dependency = 0.0;
    double peak_demand_kw = 0.0;
    Season peak_season = Season::summer;
    LocalMinutes peak_time{};
    double peak_feed_in_kw = 0.0;
    double peak_feed_in_share = 0.0;  // of the underlying annual peak
    std::array<double, kIntervalsPerDay> peak_timing_pct{};
    std::array<double, kIntervalsPerDay> minimum_timing_pct{};
    double peak_ramp_up_kw_per_min = 0.0;
    double peak_ramp_down_kw_per_min = 0.0;
    std::array<double, 12> monthly_imports_mwh{};  // January first
    std::vector<double> load_duration_kw;         // descending
    std::vector<double> ramp_duration_kw_per_min; // descending
    std::size_t days = 0;
};

/// Operational metrics for one profile against the fleet's underlying demand.
/// Profiles must share the interval grid and cover whole days.
YearMetrics compute_metrics(const AggregateProfile& profile, const AggregateProfile& underlying);

/// Histogram mass of bins lying inside [from, to) minutes after midnight.
/// A window with from > to wraps past midnight.
double window_share(std::span<const double, kIntervalsPerDay> histogram_pct, int from_minutes, int to_minutes);

/// Overlay the sample's residual change onto a system demand trace, scaled
/// from `sample_size` households to `population`.
std::vector<double> scale_to_population(const AggregateProfile& profile, const AggregateProfile& underlying,
                                        double sample_size, double population, std::span<const double> system_kw);

/// One scenario-year of fleet results.
struct FleetYearReport {
    std::string scenario;
    int year = 0;
    int calendar_year = 0;
    double avg_pv_kwp = 0.0;
    double avg_battery_kwh = 0.0;
    StageLabel stage;
    YearMetrics metrics;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const FleetYearReport& report);
/// Histograms, monthly imports and duration curves in long format.
void write_curves_header(std::ostream& out);
void write_curves(std::ostream& out, const FleetYearReport& report);

std::string clock_label(std::size_t interval_of_day);

}  // namespace prosim
