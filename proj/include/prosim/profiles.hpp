#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prosim {

inline constexpr std::size_t kIntervalsPerDay = 48;
inline constexpr std::size_t kDaysPerYear = 365;
inline constexpr std::size_t kIntervalsPerYear = kIntervalsPerDay * kDaysPerYear;
inline constexpr double kHoursPerInterval = 0.5;
// Nameplate output for half an hour.
inline constexpr double kMaxInsolationPerInterval = 0.5;

// kWh over one 30-min interval -> average kW.
constexpr double energy_to_power(double kwh) { return kwh / kHoursPerInterval; }
constexpr double power_to_energy(double kw) { return kw * kHoursPerInterval; }

using Date = std::chrono::year_month_day;
using LocalMinutes = std::chrono::sys_time<std::chrono::minutes>;

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One household's underlying demand and normalised PV insolation.
///
/// Profiles straight from ingestion may be incomplete: missing intervals are
/// NaN and duplicated rows are counted. validate_and_filter() only lets
/// through profiles with 17,520 finite, non-negative values.
struct HouseholdProfile {
    std::string household_id;
    std::vector<double> demand;      // kWh per interval
    std::vector<double> insolation;  // kWh per kW_P per interval
    Date start_date{};
    std::size_t duplicate_rows = 0;
    std::size_t out_of_range_rows = 0;
};

struct FleetDataset {
    std::vector<HouseholdProfile> households;
    std::string provenance;
};

struct Rejection {
    std::string household_id;
    std::string reason;
};

struct ValidationReport {
    std::vector<Rejection> rejections;
    bool clean() const { return rejections.empty(); }
};

struct DatasetSummary {
    std::size_t households = 0;
    double total_annual_demand_mwh = 0.0;
    double mean_annual_demand_mwh = 0.0;
    double mean_capacity_factor = 0.0;
    double peak_demand_kw = 0.0;
    std::size_t peak_interval = 0;
    LocalMinutes peak_time{};
};

/// Interval index -> naive local timestamp of the interval start.
LocalMinutes interval_start(Date start, std::size_t interval);
std::string format_timestamp(LocalMinutes t);
/// Accepts "YYYY-MM-DDTHH:MM[:SS]" or with a space separator.
LocalMinutes parse_timestamp(std::string_view text);

/// First violated invariant, or empty when the profile is valid.
std::string first_violation(const HouseholdProfile& profile);

std::pair<FleetDataset, ValidationReport> validate_and_filter(const FleetDataset& dataset);

DatasetSummary dataset_summary(const FleetDataset& dataset);

/// Normalised interchange CSV:
///   household_id,timestamp_iso8601,demand_kwh,insolation_kwh_per_kwp
/// Missing intervals become NaN; the fleet-wide earliest timestamp defines the
/// interval grid. Households come out sorted by id.
FleetDataset read_normalised_csv(std::istream& in, std::string provenance = {});
FleetDataset read_normalised_csv(const std::filesystem::path& path);
void write_normalised_csv(std::ostream& out, const FleetDataset& dataset);
void write_normalised_csv(const std::filesystem::path& path, const FleetDataset& dataset);

std::map<std::string, double> read_capacity_map(std::istream& in);
std::map<std::string, double> read_capacity_map(const std::filesystem::path& path);

struct ImportResult {
    FleetDataset dataset;
    std::vector<std::string> warnings;
};

/// Gross-meter converter. Two layouts are recognised from the header:
///  - long:  household_id,timestamp,channel,kwh  (one reading per row)
///  - wide:  Customer,Generator Capacity,Postcode,Consumption Category,date,0:30,...,0:00
///           (48 readings per row, each column labelled by interval end)
/// Channels GC and CL are consumption and are summed; GG is gross generation.
/// Row-level problems throw DataError carrying the line number.
ImportResult import_gross_meter_csv(std::istream& in, const std::map<std::string, double>& declared_capacities);
ImportResult import_gross_meter_csv(const std::filesystem::path& path,
                                    const std::map<std::string, double>& declared_capacities);

}  // namespace prosim
