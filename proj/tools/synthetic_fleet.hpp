#pragma once

#include <cstdint>
#include <vector>

#include "prosim/profiles.hpp"

namespace prosim::synth {

/// Deterministic stand-in fleet with Sydney-like seasonality: winter evening
/// heating, summer afternoon cooling on hot days, evening/morning peaks, and
/// clear-sky PV shaped by shared daily weather. Starts 1 July.
struct FleetOptions {
    std::size_t households = 24;
    std::uint64_t seed = 2012;
    double target_daily_kwh = 15.4;  // fleet mean
    double demand_sigma = 0.55;      // log-space spread of household demand
};

/// `demand_scale` multiplies the target: annual demand = target * 365 * scale.
HouseholdProfile make_household(const std::string& id, std::uint64_t seed, std::uint64_t weather_seed,
                                double target_daily_kwh, double demand_scale = 1.0);

/// Stratified lognormal demand scales with mean exactly 1, one per household,
/// in a seeded random order. Small fleets still get a high-consumption tail.
std::vector<double> demand_scales(std::size_t households, double sigma, std::uint64_t seed);
FleetDataset make_fleet(const FleetOptions& options);

}  // namespace prosim::synth
