#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prosim/dispatch.hpp"
#include "prosim/finance.hpp"
#include "prosim/fleet.hpp"
#include "prosim/investor.hpp"
#include "prosim/profiles.hpp"

namespace prosim {

enum class Sensitivity { reference, low, high };

Sensitivity parse_sensitivity(std::string_view name);
const char* sensitivity_name(Sensitivity s);

/// Low/high growth retail conditions override the discount rate, tariff
/// growth and cost declines; every other field is kept.
ScenarioParams apply_sensitivity(ScenarioParams base, Sensitivity preset);

struct ScenarioSuite {
    ScenarioParams params;
    TechnicalParams tech;
    CandidateGrid grid;
    std::vector<double> fit_fractions{0.0, 0.25, 0.5, 0.75, 1.0};
    Sensitivity sensitivity = Sensitivity::reference;
    std::filesystem::path dataset;
    std::filesystem::path output_dir = "results";
    int workers = 1;
    std::vector<std::string> trace_households;

    void validate() const;
    /// Parameters actually used for a scenario (preset applied, FiT set).
    ScenarioParams scenario_params(double fit_fraction) const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` file, `#` comments. Unknown keys are errors. Relative
/// paths resolve against `base_dir`. An empty file yields the reference case.
ScenarioSuite parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ScenarioSuite load_config(const std::filesystem::path& path);

/// Every setting that influences results, one `key=value` per line, sorted.
std::string canonical_config(const ScenarioSuite& suite);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t dataset_fingerprint(const FleetDataset& dataset);
std::string hex64(std::uint64_t v);

/// "FiT25" style identifier for a FiT fraction.
std::string scenario_id(double fit_fraction);

struct ScenarioResult {
    std::string id;
    double fit_fraction = 0.0;
    std::vector<FleetYearReport> years;
    std::vector<HouseholdOutcome> households;
};

/// Runs one FiT scenario: household simulations, per-year aggregation,
/// stage classification and metrics.
ScenarioResult run_scenario(const FleetDataset& dataset, const ScenarioParams& params, const TechnicalParams& tech,
                            const CandidateGrid& grid, int workers, const AggregateProfile& underlying);

/// Per-year fleet profile of a finished scenario (0-based year index).
AggregateProfile scenario_profile(const FleetDataset& dataset, const ScenarioResult& result, std::size_t year_index,
                                  const TechnicalParams& tech, int workers = 1);

struct RunManifest {
    std::string config_hash;
    std::string dataset_fingerprint;
    std::string software_version;
    double wall_clock_seconds = 0.0;
    std::vector<std::string> scenarios;
    std::vector<std::string> files;  // relative to the output directory

    std::string to_json() const;
};

/// Validates the dataset and the output directory, then runs every FiT
/// scenario and writes the result files. Nothing is written if either
/// input check fails.
RunManifest run_suite(const ScenarioSuite& suite);
RunManifest run_suite(const ScenarioSuite& suite, const FleetDataset& dataset);

const char* software_version();

}  // namespace prosim
