#pragma once

#include <cstdint>
#include <string>

// Randomised property checks shared by the unit tests and the acceptance run.
namespace properties {

struct Outcome {
    std::size_t cases = 0;
    std::size_t failures = 0;
    double max_error = 0.0;
    std::string first_failure;

    bool ok() const { return failures == 0; }
    void fail(const std::string& what);
    std::string describe() const;
};

// kernel vs brute-force oracle: every series, every interval, absolute error
Outcome dispatch_matches_oracle(std::size_t cases, std::uint64_t seed, double tolerance = 1e-9);

// every lane of the vectorised batch kernel equals the scalar totals kernel bit for bit
Outcome dispatch_batch_matches_scalar(std::size_t cases, std::uint64_t seed);

// balance, SoC bounds, import/export exclusivity, binding-constraint implications, loss accounting
Outcome dispatch_invariants(std::size_t cases, std::uint64_t seed);

// larger battery never raises annual imports or exports (single year, empty start)
Outcome dispatch_battery_monotonicity(std::size_t cases, std::uint64_t seed);

// aggregate(a ++ b) == aggregate(a) + aggregate(b), and aggregate(k copies) == k * aggregate
Outcome fleet_aggregation_linearity(std::size_t cases, std::uint64_t seed);

// every Table 4 column average classifies to its column label; random averages always classify
Outcome fleet_classifier_totality(std::size_t cases, std::uint64_t seed);

// peak/min histograms sum to 100, dependency within [0, 1] for PV-only residuals, LDC non-increasing
Outcome fleet_histogram_normalisation(std::size_t cases, std::uint64_t seed);

// byte-identical outputs for workers 1, 2 and 3, and scenario-alone vs in-suite
Outcome scenario_worker_determinism();

}  // namespace properties
