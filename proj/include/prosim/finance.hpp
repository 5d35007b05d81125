#pragma once

#include <optional>
#include <span>
#include <vector>

namespace prosim {

/// Retail-market trajectory and investment appraisal settings.
struct ScenarioParams {
    double usage_charge_start = 0.27;   // $/kWh
    double fit_fraction = 0.0;          // feed-in rate as a share of the usage charge
    double daily_charge_start = 0.95;   // $/day
    double tariff_growth = 0.05;        // per year
    double discount_rate = 0.06;        // per year
    double pv_cost_start = 1400.0;      // $/kW_P
    double battery_cost_start = 900.0;  // $/kWh
    double pv_cost_growth = -0.059;
    double battery_cost_growth = -0.08;
    double fit_capacity_limit = 5.0;    // kW_P, inclusive
    int horizon_years = 10;
    double payback_threshold = 5.0;     // years
    int sim_years = 20;
    int sim_start = 2018;               // calendar year of simulation year 1

    void validate() const;
    double export_tariff_start() const { return fit_fraction * usage_charge_start; }
};

enum class TariffKind { import, daily };

/// Rate for horizon year n of an appraisal made in simulation year t (both 1-based).
double tariff_at(TariffKind kind, int n, int t, const ScenarioParams& params);

/// Feed-in rate; zero when the combined PV capacity exceeds the eligibility limit.
double fit_rate(double total_pv_kwp, int n, int t, const ScenarioParams& params);

/// Annual bill. Net credits (negative bills) are allowed.
double annual_bill(double import_kwh, double export_kwh, double total_pv_kwp, int n, int t,
                   const ScenarioParams& params);

/// Upfront cost of incremental PV (kW_P) and battery (kWh) bought in year t.
double system_cost(double pv_kwp, double battery_kwh, int t, const ScenarioParams& params);

struct CashFlowSeries {
    double upfront_cost = 0.0;
    std::vector<double> annual_savings;  // horizon years 1..N
};

double npv(const CashFlowSeries& cashflow, const ScenarioParams& params);

/// Smallest whole year at which cumulative discounted savings cover the
/// upfront cost; 0 for a free investment; nullopt when never within the horizon.
std::optional<int> discounted_payback(const CashFlowSeries& cashflow, const ScenarioParams& params);

bool passes_payback_gate(std::optional<int> dpp, const ScenarioParams& params);

}  // namespace prosim
