#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

std::vector<Step> dispatch(const std::vector<double>& demand, const std::vector<double>& insolation,
                           const std::vector<Year>& years, double power_limit_kw, double round_trip,
                           double initial_soc) {
    const double eta = std::sqrt(round_trip);
    const double cap_energy = power_limit_kw / 2.0;  // 30 minutes at the limit
    std::vector<Step> out;
    double soc = initial_soc;
    for (const auto& y : years) {
        if (soc > y.capacity_kwh) soc = y.capacity_kwh;
        for (std::size_t i = 0; i < demand.size(); ++i) {
            Step s;
            const double gen = y.pv_kw * insolation[i];
            const double net = demand[i] - gen;
            if (net < 0) {
                const double headroom = (y.capacity_kwh - soc) / eta;
                s.charge_in = std::min({-net, cap_energy, headroom});
                soc = soc + s.charge_in * eta;
                s.export_ = -net - s.charge_in;
                s.pv_direct = demand[i];
            } else {
                s.discharge_out = std::min({net, cap_energy, soc * eta});
                soc = soc - s.discharge_out / eta;
                s.import = net - s.discharge_out;
                s.pv_direct = gen;
            }
            s.soc = soc;
            out.push_back(s);
        }
    }
    return out;
}

double annuity_factor(double rate, int years) {
    if (rate == 0) return years;
    return (1 - std::pow(1 + rate, -years)) / rate;
}

double discounted_sum(const std::vector<double>& savings, double rate, int upto) {
    double total = 0;
    double factor = 1;
    for (int n = 1; n <= upto; ++n) {
        factor *= 1 + rate;
        total += savings[n - 1] / factor;
    }
    return total;
}

}  // namespace oracle

namespace fixtures {

using namespace prosim;

HouseholdProfile household(std::vector<double> demand, std::vector<double> insolation, std::string id) {
    HouseholdProfile h;
    h.household_id = std::move(id);
    h.demand = std::move(demand);
    h.insolation = std::move(insolation);
    h.start_date = Date{std::chrono::year{2012}, std::chrono::July, std::chrono::day{1}};
    return h;
}

HouseholdProfile constant_household(double demand_kwh, double insolation, std::string id) {
    return household(std::vector<double>(kIntervalsPerYear, demand_kwh),
                     std::vector<double>(kIntervalsPerYear, insolation), std::move(id));
}

HouseholdProfile daily_pattern_household(std::string id, double demand_scale) {
    std::vector<double> d(kIntervalsPerYear), s(kIntervalsPerYear);
    for (std::size_t i = 0; i < kIntervalsPerYear; ++i) {
        const std::size_t k = i % kIntervalsPerDay;
        const double hour = static_cast<double>(k) / 2.0;
        double kw = 0.3;
        if (hour >= 6.5 && hour < 8.5) kw = 1.2;
        if (hour >= 17.0 && hour < 22.0) kw = 2.0;
        d[i] = kw * demand_scale / 2.0;
        if (hour >= 6.0 && hour < 18.0) s[i] = 0.4 * std::sin(3.14159265358979 * (hour - 6.0) / 12.0);
    }
    return household(std::move(d), std::move(s), std::move(id));
}

}  // namespace fixtures
