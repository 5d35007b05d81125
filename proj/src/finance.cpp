#include "prosim/finance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prosim {

void ScenarioParams::validate() const {
    for (auto [rate, name] : {std::pair{tariff_growth, "tariff_growth"}, {discount_rate, "discount_rate"},
                              {pv_cost_growth, "pv_cost_growth"}, {battery_cost_growth, "battery_cost_growth"}})
        if (!(rate > -1.0)) throw std::invalid_argument(std::string(name) + " must be > -1");
    if (!(fit_fraction >= 0.0 && fit_fraction <= 1.0)) throw std::invalid_argument("fit_fraction must be in [0, 1]");
    if (horizon_years < 1) throw std::invalid_argument("horizon_years must be >= 1");
    if (sim_years < 1) throw std::invalid_argument("sim_years must be >= 1");
    for (auto [v, name] : {std::pair{usage_charge_start, "usage_charge_start"},
                           {daily_charge_start, "daily_charge_start"}, {pv_cost_start, "pv_cost_start"},
                           {battery_cost_start, "battery_cost_start"}, {fit_capacity_limit, "fit_capacity_limit"},
                           {payback_threshold, "payback_threshold"}})
        if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " must be >= 0");
}

namespace {

double growth(double rate, int exponent) { return std::pow(1.0 + rate, exponent); }

}  // namespace

double tariff_at(TariffKind kind, int n, int t, const ScenarioParams& p) {
    if (n < 1 || t < 1) throw std::invalid_argument("tariff_at: n and t are 1-based");
    const double start = kind == TariffKind::import ? p.usage_charge_start : p.daily_charge_start;
    return start * growth(p.tariff_growth, n + t - 2);
}

double fit_rate(double total_pv_kwp, int n, int t, const ScenarioParams& p) {
    if (n < 1 || t < 1) throw std::invalid_argument("fit_rate: n and t are 1-based");
    if (total_pv_kwp > p.fit_capacity_limit) return 0.0;
    return p.export_tariff_start() * growth(p.tariff_growth, n + t - 2);
}

double annual_bill(double import_kwh, double export_kwh, double total_pv_kwp, int n, int t, const ScenarioParams& p) {
    return import_kwh * tariff_at(TariffKind::import, n, t, p) - export_kwh * fit_rate(total_pv_kwp, n, t, p) +
           365.0 * tariff_at(TariffKind::daily, n, t, p);
}

double system_cost(double pv_kwp, double battery_kwh, int t, const ScenarioParams& p) {
    if (t < 1) throw std::invalid_argument("system_cost: t is 1-based");
    return pv_kwp * p.pv_cost_start * growth(p.pv_cost_growth, t - 1) +
           battery_kwh * p.battery_cost_start * growth(p.battery_cost_growth, t - 1);
}

double npv(const CashFlowSeries& cf, const ScenarioParams& p) {
    double value = 0.0;
    double discount = 1.0;
    for (double s : cf.annual_savings) {
        discount *= 1.0 + p.discount_rate;
        value += s / discount;
    }
    return value - cf.upfront_cost;
}

std::optional<int> discounted_payback(const CashFlowSeries& cf, const ScenarioParams& p) {
    if (cf.upfront_cost <= 0.0) return 0;
    double recovered = 0.0;
    double discount = 1.0;
    for (std::size_t n = 0; n < cf.annual_savings.size(); ++n) {
        discount *= 1.0 + p.discount_rate;
        recovered += cf.annual_savings[n] / discount;
        if (recovered >= cf.upfront_cost) return static_cast<int>(n + 1);
    }
    return std::nullopt;
}

bool passes_payback_gate(std::optional<int> dpp, const ScenarioParams& p) {
    return dpp.has_value() && *dpp <= p.payback_threshold;
}

}  // namespace prosim
