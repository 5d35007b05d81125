#include "synthetic_fleet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <boost/math/distributions/normal.hpp>

namespace prosim::synth {

namespace {

constexpr double kPi = std::numbers::pi;

struct DayWeather {
    double season;      // +1 mid-summer, -1 mid-winter
    double clearness;   // 0..1
    double temperature; // daily maximum, deg C
};

std::vector<DayWeather> make_weather(std::uint64_t seed, Date start) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> temp_noise(0.0, 3.5);
    std::gamma_distribution<double> ga(4.0, 1.0), gb(1.6, 1.0);
    std::vector<DayWeather> out(kDaysPerYear);
    const auto jan1 = std::chrono::sys_days{std::chrono::year_month_day{start.year() + std::chrono::years{1},
                                                                         std::chrono::January, std::chrono::day{1}}};
    double carry = 0.0;
    for (std::size_t d = 0; d < kDaysPerYear; ++d) {
        const auto date = std::chrono::sys_days{start} + std::chrono::days{static_cast<int>(d)};
        const double doy = static_cast<double>((date - jan1).count());
        const double season = std::cos(2.0 * kPi * (doy - 15.0) / 365.0);
        const double a = ga(rng), b = gb(rng);
        carry = 0.6 * carry + temp_noise(rng);
        out[d] = {season, a / (a + b), 23.0 + 5.5 * season + carry};
    }
    return out;
}

double bump(double hour, double centre, double width) {
    const double z = (hour - centre) / width;
    return std::exp(-0.5 * z * z);
}

}  // namespace

HouseholdProfile make_household(const std::string& id, std::uint64_t seed, std::uint64_t weather_seed,
                                double target_daily_kwh, double demand_scale) {
    const Date start{std::chrono::year{2012}, std::chrono::July, std::chrono::day{1}};
    const auto weather = make_weather(weather_seed, start);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

    const double scale = demand_scale;
    const double base_kw = between(0.18, 0.40);
    const double morning_kw = between(0.4, 1.1);
    const double evening_kw = between(0.9, 2.0);
    const double evening_hour = between(18.0, 19.5);
    const double heating_kw = between(0.3, 1.3);
    const double cooling_kw_per_deg = between(0.06, 0.16);
    const double orientation = between(0.82, 1.10);
    std::normal_distribution<double> noise(0.0, 0.12);

    HouseholdProfile p;
    p.household_id = id;
    p.start_date = start;
    p.demand.resize(kIntervalsPerYear);
    p.insolation.resize(kIntervalsPerYear);
    for (std::size_t d = 0; d < kDaysPerYear; ++d) {
        const auto& w = weather[d];
        const double day_length = 12.0 + 2.2 * w.season;
        const double sunrise = 12.0 - day_length / 2.0;
        const double peak_output = (0.78 + 0.10 * w.season) * orientation;
        const double clear = std::clamp(w.clearness + 0.08 * (u(rng) - 0.5), 0.05, 1.0);
        const double cold = std::max(0.0, -w.season) + std::max(0.0, 17.0 - w.temperature) / 10.0;
        const double hot = std::max(0.0, w.temperature - 25.0);
        for (std::size_t k = 0; k < kIntervalsPerDay; ++k) {
            const double hour = static_cast<double>(k) * 0.5 + 0.25;
            double kw = base_kw * (1.0 - 0.35 * bump(hour, 4.0, 1.1));
            kw += morning_kw * bump(hour, 7.3, 0.9);
            kw += evening_kw * (bump(hour, evening_hour, 1.4) + 0.35 * bump(hour, 21.5, 1.0));
            kw += heating_kw * cold * (bump(hour, 19.5, 2.2) + 0.6 * bump(hour, 7.0, 1.2) + 0.2 * bump(hour, 0.5, 1.5));
            kw += cooling_kw_per_deg * hot * bump(hour, 18.5, 3.2);
            kw *= scale * std::max(0.3, 1.0 + noise(rng));
            p.demand[d * kIntervalsPerDay + k] = std::max(0.0, kw) * kHoursPerInterval;

            double sun = 0.0;
            if (hour > sunrise && hour < sunrise + day_length) sun = std::pow(std::sin(kPi * (hour - sunrise) / day_length), 1.4);
            const double kw_per_kwp = peak_output * clear * sun;
            p.insolation[d * kIntervalsPerDay + k] = std::min(kMaxInsolationPerInterval, kw_per_kwp * kHoursPerInterval);
        }
    }
    // rescale demand so the fleet mean lands near the target
    double total = 0.0;
    for (double v : p.demand) total += v;
    const double factor = target_daily_kwh * kDaysPerYear * scale / total;
    for (auto& v : p.demand) v *= factor;
    return p;
}

std::vector<double> demand_scales(std::size_t households, double sigma, std::uint64_t seed) {
    std::vector<double> s(households);
    const boost::math::normal_distribution<double> z;
    double sum = 0.0;
    for (std::size_t i = 0; i < households; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(households);
        s[i] = std::exp(sigma * boost::math::quantile(z, q));
        sum += s[i];
    }
    for (auto& v : s) v *= static_cast<double>(households) / sum;
    std::mt19937_64 rng(seed);
    std::shuffle(s.begin(), s.end(), rng);
    return s;
}

FleetDataset make_fleet(const FleetOptions& options) {
    FleetDataset fleet;
    fleet.provenance = "synthetic fleet, seed " + std::to_string(options.seed);
    std::mt19937_64 seeds(options.seed);
    const auto weather_seed = seeds();
    const auto scales = demand_scales(options.households, options.demand_sigma, seeds());
    for (std::size_t i = 0; i < options.households; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "H%03zu", i + 1);
        fleet.households.push_back(make_household(id, seeds(), weather_seed, options.target_daily_kwh, scales[i]));
    }
    return fleet;
}

}  // namespace prosim::synth
