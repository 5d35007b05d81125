#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prosim/profiles.hpp"

namespace prosim {

/// Battery and PV technical characteristics. Defaults follow a
/// Powerwall-class battery and a typical rooftop PV warranty.
struct TechnicalParams {
    double battery_power_limit_kw = 5.0;
    double round_trip_efficiency = 0.92;
    double depth_of_discharge = 1.0;
    double pv_end_of_life_fraction = 0.8;
    int pv_lifetime_years = 25;
    double battery_end_of_life_fraction = 0.7;
    int battery_lifetime_years = 10;

    void validate() const;

    // Round-trip losses are split evenly between the two conversions.
    double charge_efficiency() const;
    double discharge_efficiency() const;
    double power_limit_energy() const { return power_to_energy(battery_power_limit_kw); }

    /// Linear capacity factor for an asset of the given age, 0 once retired.
    double pv_derating(int age) const;
    double battery_derating(int age) const;
};

struct Vintage {
    int install_year = 0;  // simulation year, 1-based
    double capacity = 0.0;
};

/// Installed PV (kW_P) and battery (kWh) vintages for one household.
class AssetLedger {
public:
    void add_pv(int install_year, double kwp);
    void add_battery(int install_year, double kwh);

    const std::vector<Vintage>& pv() const { return pv_; }
    const std::vector<Vintage>& battery() const { return battery_; }
    bool empty() const { return pv_.empty() && battery_.empty(); }

    /// Nameplate capacity of vintages in service during `year`.
    double nominal_pv(int year, const TechnicalParams& params) const;
    double nominal_battery(int year, const TechnicalParams& params) const;
    /// Degraded PV capacity, the multiplier applied to the insolation profile.
    double effective_pv(int year, const TechnicalParams& params) const;

    /// Drops vintages whose age at `year` has reached their lifetime.
    void retire(int year, const TechnicalParams& params);

private:
    std::vector<Vintage> pv_;
    std::vector<Vintage> battery_;
};

std::vector<double> pv_generation(const HouseholdProfile& profile, const AssetLedger& ledger, int year,
                                  const TechnicalParams& params = {});

double usable_battery_capacity(const AssetLedger& ledger, int year, const TechnicalParams& params = {});

/// Asset state for one simulated year; constant within the year.
struct YearState {
    double pv_kw = 0.0;        // degraded PV capacity
    double usable_kwh = 0.0;   // degraded usable battery energy
};

struct AnnualEnergy {
    double import_kwh = 0.0;
    double export_kwh = 0.0;
};

struct DispatchResult {
    int start_year = 1;
    int horizon = 1;
    std::vector<double> generation;
    std::vector<double> grid_import;
    std::vector<double> grid_export;
    std::vector<double> pv_direct_use;
    std::vector<double> battery_charge_in;
    std::vector<double> battery_discharge_out;
    std::vector<double> soc;
    std::vector<AnnualEnergy> annual;
    double final_soc = 0.0;

    std::size_t size() const { return grid_import.size(); }
    /// Residual (import - export) for one horizon year, 0-based.
    std::vector<double> residual(int horizon_year) const;
};

/// Year-by-year asset state for `horizon` years starting at `start_year`.
std::vector<YearState> year_states(const AssetLedger& ledger, const TechnicalParams& params, int start_year,
                                   int horizon);

/// Self-consumption dispatch over the repeated annual profile. SoC carries
/// across year boundaries and is clamped to the new usable capacity there.
DispatchResult simulate_dispatch(const HouseholdProfile& profile, const AssetLedger& ledger,
                                 const TechnicalParams& params, int start_year, int horizon,
                                 double initial_soc = 0.0);

/// Dispatch driven directly by per-year asset states (one per horizon year).
DispatchResult simulate_dispatch(const HouseholdProfile& profile, std::span<const YearState> states,
                                 const TechnicalParams& params, int start_year, double initial_soc = 0.0);

/// Lookup tables that let the totals kernel jump over sunless stretches in
/// which an empty battery leaves nothing to dispatch (import = demand).
struct DispatchIndex {
    std::vector<double> demand_prefix;       // size n + 1
    std::vector<std::uint32_t> next_sunlit;  // first j >= i with insolation > 0, or n

    static DispatchIndex build(std::span<const double> demand, std::span<const double> insolation);
};

/// Same dispatch as simulate_dispatch, keeping only annual import/export
/// totals. Writes one entry per state into `annual`; returns the final SoC.
/// With an index, skipped stretches are summed from prefix sums, so totals
/// can differ from the interval-by-interval sum in the last few ulps.
double dispatch_totals(std::span<const double> demand, std::span<const double> insolation,
                       std::span<const YearState> years, const TechnicalParams& params, double initial_soc,
                       std::span<AnnualEnergy> annual, const DispatchIndex* index = nullptr);

/// Lanes dispatched side by side by dispatch_totals_batch.
inline constexpr std::size_t kDispatchLanes = 4;

/// Up to kDispatchLanes independent totals-only dispatches over one profile,
/// vectorised across lanes. `years` and `annual` are year-major
/// (entry y * lanes + l); every lane runs the same number of years. Each lane
/// reproduces dispatch_totals without an index bit for bit. The index, when
/// given, only lets dark stretches with all lanes empty run a cheaper loop.
void dispatch_totals_batch(std::span<const double> demand, std::span<const double> insolation,
                           std::span<const YearState> years, std::size_t lanes, const TechnicalParams& params,
                           std::span<const double> initial_soc, std::span<AnnualEnergy> annual,
                           std::span<double> final_soc = {}, const DispatchIndex* index = nullptr);

std::vector<AnnualEnergy> annual_energy_summary(const DispatchResult& result);

/// Per-interval trace in the normalised CSV conventions.
void write_dispatch_trace(std::ostream& out, const HouseholdProfile& profile, const DispatchResult& result,
                          bool header = true);

}  // namespace prosim
