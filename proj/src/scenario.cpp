#include "prosim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include "json.hpp"
#include <sstream>

#include "csv_util.hpp"

#ifndef PROSIM_VERSION
#define PROSIM_VERSION "0.0.0"
#endif

namespace prosim {

namespace fs = std::filesystem;
using detail::format_double;
using detail::trim;

const char* software_version() { return PROSIM_VERSION; }

Sensitivity parse_sensitivity(std::string_view name) {
    const auto n = detail::lower(trim(name));
    if (n == "reference" || n == "ref") return Sensitivity::reference;
    if (n == "low") return Sensitivity::low;
    if (n == "high") return Sensitivity::high;
    throw ConfigError("unknown sensitivity preset '" + std::string(name) + "' (reference, low, high)");
}

const char* sensitivity_name(Sensitivity s) {
    switch (s) {
        case Sensitivity::reference: return "reference";
        case Sensitivity::low: return "low";
        case Sensitivity::high: return "high";
    }
    return "?";
}

ScenarioParams apply_sensitivity(ScenarioParams base, Sensitivity preset) {
    switch (preset) {
        case Sensitivity::reference:
            break;
        case Sensitivity::low:
            base.discount_rate = 0.10;
            base.tariff_growth = 0.02;
            base.pv_cost_growth = -0.03;
            base.battery_cost_growth = -0.04;
            break;
        case Sensitivity::high:
            base.discount_rate = 0.02;
            base.tariff_growth = 0.08;
            base.pv_cost_growth = -0.09;
            base.battery_cost_growth = -0.12;
            break;
    }
    return base;
}

void ScenarioSuite::validate() const {
    params.validate();
    tech.validate();
    grid.validate();
    for (double f : fit_fractions)
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("fit fractions must lie in [0, 1]");
    if (workers < 0) throw ConfigError("workers must be >= 0");
}

ScenarioParams ScenarioSuite::scenario_params(double fit_fraction) const {
    auto p = apply_sensitivity(params, sensitivity);
    p.fit_fraction = fit_fraction;
    return p;
}

namespace {

struct Field {
    std::function<void(ScenarioSuite&, std::string_view)> set;
    std::function<std::string(const ScenarioSuite&)> get;  // empty: not part of the canonical form
};

double to_double(std::string_view key, std::string_view v) {
    double d = 0.0;
    if (!detail::parse_double(v, d)) throw ConfigError("'" + std::string(key) + "': not a number: " + std::string(v));
    return d;
}

int to_int(std::string_view key, std::string_view v) {
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw ConfigError("'" + std::string(key) + "': expected an integer");
    return static_cast<int>(d);
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        auto dbl = [&](const std::string& key, double ScenarioParams::*m) {
            t[key] = {[key, m](ScenarioSuite& s, std::string_view v) { s.params.*m = to_double(key, v); },
                      [m](const ScenarioSuite& s) { return format_double(s.params.*m); }};
        };
        auto integer = [&](const std::string& key, int ScenarioParams::*m) {
            t[key] = {[key, m](ScenarioSuite& s, std::string_view v) { s.params.*m = to_int(key, v); },
                      [m](const ScenarioSuite& s) { return std::to_string(s.params.*m); }};
        };
        dbl("usage_charge_start", &ScenarioParams::usage_charge_start);
        dbl("daily_charge_start", &ScenarioParams::daily_charge_start);
        dbl("tariff_growth", &ScenarioParams::tariff_growth);
        dbl("discount_rate", &ScenarioParams::discount_rate);
        dbl("pv_cost_start", &ScenarioParams::pv_cost_start);
        dbl("battery_cost_start", &ScenarioParams::battery_cost_start);
        dbl("pv_cost_growth", &ScenarioParams::pv_cost_growth);
        dbl("battery_cost_growth", &ScenarioParams::battery_cost_growth);
        dbl("fit_capacity_limit", &ScenarioParams::fit_capacity_limit);
        dbl("payback_threshold", &ScenarioParams::payback_threshold);
        integer("horizon_years", &ScenarioParams::horizon_years);
        integer("sim_years", &ScenarioParams::sim_years);
        integer("sim_start", &ScenarioParams::sim_start);

        auto tech_dbl = [&](const std::string& key, double TechnicalParams::*m) {
            t[key] = {[key, m](ScenarioSuite& s, std::string_view v) { s.tech.*m = to_double(key, v); },
                      [m](const ScenarioSuite& s) { return format_double(s.tech.*m); }};
        };
        auto tech_int = [&](const std::string& key, int TechnicalParams::*m) {
            t[key] = {[key, m](ScenarioSuite& s, std::string_view v) { s.tech.*m = to_int(key, v); },
                      [m](const ScenarioSuite& s) { return std::to_string(s.tech.*m); }};
        };
        tech_dbl("battery_power_limit_kw", &TechnicalParams::battery_power_limit_kw);
        tech_dbl("round_trip_efficiency", &TechnicalParams::round_trip_efficiency);
        tech_dbl("depth_of_discharge", &TechnicalParams::depth_of_discharge);
        tech_dbl("pv_end_of_life_fraction", &TechnicalParams::pv_end_of_life_fraction);
        tech_int("pv_lifetime_years", &TechnicalParams::pv_lifetime_years);
        tech_dbl("battery_end_of_life_fraction", &TechnicalParams::battery_end_of_life_fraction);
        tech_int("battery_lifetime_years", &TechnicalParams::battery_lifetime_years);

        auto grid_dbl = [&](const std::string& key, double CandidateGrid::*m) {
            t[key] = {[key, m](ScenarioSuite& s, std::string_view v) { s.grid.*m = to_double(key, v); },
                      [m](const ScenarioSuite& s) { return format_double(s.grid.*m); }};
        };
        grid_dbl("pv_max", &CandidateGrid::pv_max);
        grid_dbl("battery_max", &CandidateGrid::battery_max);
        grid_dbl("pv_step", &CandidateGrid::pv_step);
        grid_dbl("battery_step", &CandidateGrid::battery_step);
        grid_dbl("expansion_factor", &CandidateGrid::expansion_factor);

        t["fit_fractions"] = {[](ScenarioSuite& s, std::string_view v) {
                                  s.fit_fractions.clear();
                                  for (auto item : detail::split(v))
                                      if (!item.empty()) s.fit_fractions.push_back(to_double("fit_fractions", item));
                              },
                              [](const ScenarioSuite& s) {
                                  std::string out;
                                  for (double f : s.fit_fractions) out += (out.empty() ? "" : ",") + format_double(f);
                                  return out;
                              }};
        t["sensitivity"] = {[](ScenarioSuite& s, std::string_view v) { s.sensitivity = parse_sensitivity(v); },
                            [](const ScenarioSuite& s) { return std::string(sensitivity_name(s.sensitivity)); }};
        t["dataset"] = {[](ScenarioSuite& s, std::string_view v) { s.dataset = std::string(v); }, {}};
        t["output_dir"] = {[](ScenarioSuite& s, std::string_view v) { s.output_dir = std::string(v); }, {}};
        t["workers"] = {[](ScenarioSuite& s, std::string_view v) { s.workers = to_int("workers", v); }, {}};
        t["trace"] = {[](ScenarioSuite& s, std::string_view v) {
                          for (auto item : detail::split(v))
                              if (!item.empty()) s.trace_households.emplace_back(item);
                      },
                      {}};

        // Symbol-style aliases for the retail-market inputs.
        const std::pair<const char*, const char*> aliases[] = {
            {"T_Import_Start", "usage_charge_start"}, {"T_Daily_Start", "daily_charge_start"},
            {"R_Tariffs", "tariff_growth"},          {"R_d", "discount_rate"},
            {"C_PV_Start", "pv_cost_start"},         {"C_Battery_Start", "battery_cost_start"},
            {"R_PV", "pv_cost_growth"},              {"R_Battery", "battery_cost_growth"},
            {"P_Export_Limit", "fit_capacity_limit"}};
        for (auto [alias, key] : aliases) t[alias] = {t.at(key).set, {}};
        return t;
    }();
    return table;
}

}  // namespace

ScenarioSuite parse_config(std::istream& in, const fs::path& base_dir) {
    ScenarioSuite suite;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(text.substr(0, eq)));
        const auto value = trim(text.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            it->second.set(suite, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!suite.dataset.empty() && suite.dataset.is_relative() && !base_dir.empty()) suite.dataset = base_dir / suite.dataset;
    if (suite.output_dir.is_relative() && !base_dir.empty()) suite.output_dir = base_dir / suite.output_dir;
    return suite;
}

ScenarioSuite load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

std::string canonical_config(const ScenarioSuite& suite) {
    // presets are folded in so that equivalent configurations hash alike
    ScenarioSuite effective = suite;
    effective.params = apply_sensitivity(suite.params, suite.sensitivity);
    std::string out;
    for (const auto& [key, field] : fields())
        if (field.get) out += key + "=" + field.get(effective) + "\n";
    return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t dataset_fingerprint(const FleetDataset& dataset) {
    std::uint64_t h = fnv1a("prosim-dataset");
    auto mix_series = [&](const std::vector<double>& v) {
        h = fnv1a(std::string_view(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)), h);
    };
    for (const auto& hh : dataset.households) {
        h = fnv1a(hh.household_id, h);
        h = fnv1a(format_timestamp(interval_start(hh.start_date, 0)), h);
        mix_series(hh.demand);
        mix_series(hh.insolation);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string scenario_id(double fit_fraction) {
    const double pct = fit_fraction * 100.0;
    const double rounded = std::round(pct);
    if (std::abs(pct - rounded) < 1e-9) return "FiT" + std::to_string(static_cast<int>(rounded));
    char buf[32];
    std::snprintf(buf, sizeof buf, "FiT%.4g", pct);
    return buf;
}

AggregateProfile scenario_profile(const FleetDataset& dataset, const ScenarioResult& result, std::size_t year_index,
                                  const TechnicalParams& tech, int workers) {
    const auto n = static_cast<std::ptrdiff_t>(dataset.households.size());
    std::vector<std::vector<double>> residuals(dataset.households.size());
    const int threads = std::max(workers, 1);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        residuals[i] = realised_dispatch(dataset.households[i], result.households[i], year_index, tech).residual(0);
    (void)threads;
    const int year = result.households.empty() ? static_cast<int>(year_index) + 1
                                               : result.households.front().years.at(year_index).year;
    // summed in dataset order so the profile does not depend on scheduling
    return aggregate(residuals, dataset.households.empty() ? Date{} : dataset.households.front().start_date, year,
                     result.id);
}

ScenarioResult run_scenario(const FleetDataset& dataset, const ScenarioParams& params, const TechnicalParams& tech,
                            const CandidateGrid& grid, int workers, const AggregateProfile& underlying) {
    ScenarioResult r;
    r.id = scenario_id(params.fit_fraction);
    r.fit_fraction = params.fit_fraction;
    r.households = simulate_households(dataset, params, tech, grid, workers);
    const double count = static_cast<double>(std::max<std::size_t>(dataset.households.size(), 1));
    for (int y = 0; y < params.sim_years; ++y) {
        FleetYearReport report;
        report.scenario = r.id;
        report.year = y + 1;
        report.calendar_year = params.sim_start + y;
        for (const auto& h : r.households) {
            report.avg_pv_kwp += h.years[static_cast<std::size_t>(y)].nominal_pv;
            report.avg_battery_kwh += h.years[static_cast<std::size_t>(y)].nominal_battery;
        }
        report.avg_pv_kwp /= count;
        report.avg_battery_kwh /= count;
        report.stage = classify_stage(report.avg_pv_kwp, report.avg_battery_kwh);
        if (!dataset.households.empty()) {
            const auto profile = scenario_profile(dataset, r, static_cast<std::size_t>(y), tech, workers);
            report.metrics = compute_metrics(profile, underlying);
        }
        r.years.push_back(std::move(report));
    }
    return r;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["software_version"] = software_version;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["scenarios"] = scenarios;
    j["files"] = files;
    return j.dump(2) + "\n";
}

namespace {

class OutputWriter {
public:
    explicit OutputWriter(fs::path root) : root_(std::move(root)) {}

    std::ofstream open(const fs::path& relative) {
        const auto full = root_ / relative;
        fs::create_directories(full.parent_path());
        std::ofstream out(full, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + full.string());
        files_.push_back(relative.generic_string());
        return out;
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

void check_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".prosim-write-check";
    {
        std::ofstream out(probe);
        if (!out) throw std::runtime_error("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

}  // namespace

RunManifest run_suite(const ScenarioSuite& suite) {
    if (suite.dataset.empty()) throw DataError("no dataset configured");
    auto raw = read_normalised_csv(suite.dataset);
    auto [dataset, report] = validate_and_filter(raw);
    if (dataset.households.empty()) throw DataError("dataset " + suite.dataset.string() + " has no valid households");
    return run_suite(suite, dataset);
}

RunManifest run_suite(const ScenarioSuite& suite, const FleetDataset& dataset) {
    const auto started = std::chrono::steady_clock::now();
    suite.validate();
    for (const auto& h : dataset.households)
        if (auto why = first_violation(h); !why.empty())
            throw DataError("household " + h.household_id + " fails validation: " + why);
    check_output_dir(suite.output_dir);

    RunManifest manifest;
    manifest.config_hash = hex64(fnv1a(canonical_config(suite)));
    manifest.dataset_fingerprint = hex64(dataset_fingerprint(dataset));
    manifest.software_version = software_version();

    OutputWriter writer(suite.output_dir);
    const auto underlying = underlying_profile(dataset);
    std::vector<ScenarioResult> results;
    for (double fit : suite.fit_fractions) {
        const auto params = suite.scenario_params(fit);
        auto result = run_scenario(dataset, params, suite.tech, suite.grid, suite.workers, underlying);
        const fs::path dir = result.id;

        auto series = writer.open(dir / "annual_series.csv");
        series << "year,calendar_year,avg_pv_kwp,avg_battery_kwh,imports_mwh,exports_mwh,stage\n";
        for (const auto& y : result.years)
            series << y.year << ',' << y.calendar_year << ',' << format_double(y.avg_pv_kwp) << ','
                   << format_double(y.avg_battery_kwh) << ',' << format_double(y.metrics.imports_mwh) << ','
                   << format_double(y.metrics.exports_mwh) << ',' << y.stage.name() << '\n';

        auto metrics = writer.open(dir / "metrics.csv");
        write_metrics_header(metrics);
        for (const auto& y : result.years) write_metrics_row(metrics, y);

        auto curves = writer.open(dir / "curves.csv");
        write_curves_header(curves);
        for (const auto& y : result.years) write_curves(curves, y);

        auto log = writer.open(dir / "investments.csv");
        write_investment_log(log, result.households, params);

        for (const auto& id : suite.trace_households) {
            const auto it = std::find_if(dataset.households.begin(), dataset.households.end(),
                                         [&](const HouseholdProfile& h) { return h.household_id == id; });
            if (it == dataset.households.end()) throw DataError("trace: unknown household " + id);
            const auto idx = static_cast<std::size_t>(it - dataset.households.begin());
            auto trace = writer.open(dir / ("trace_" + id + ".csv"));
            for (std::size_t y = 0; y < result.households[idx].years.size(); ++y)
                write_dispatch_trace(trace, *it, realised_dispatch(*it, result.households[idx], y, suite.tech), y == 0);
        }
        manifest.scenarios.push_back(result.id);
        // household outcomes are large; only the fleet reports are kept past this point
        result.households.clear();
        results.push_back(std::move(result));
    }

    {
        FleetYearReport base;
        base.scenario = "underlying";
        base.calendar_year = suite.params.sim_start;
        base.stage = classify_stage(0.0, 0.0);
        if (!dataset.households.empty()) base.metrics = compute_metrics(underlying, underlying);
        auto out = writer.open("underlying_metrics.csv");
        write_metrics_header(out);
        write_metrics_row(out, base);
    }
    {
        auto out = writer.open("stages.csv");
        out << "calendar_year";
        for (const auto& r : results) out << ',' << r.id;
        out << '\n';
        const int years = suite.params.sim_years;
        for (int y = 0; y < years && !results.empty(); ++y) {
            out << suite.params.sim_start + y;
            for (const auto& r : results) out << ',' << r.years[static_cast<std::size_t>(y)].stage.name();
            out << '\n';
        }
    }

    manifest.files = writer.files();
    manifest.files.push_back("manifest.json");
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream(suite.output_dir / "manifest.json", std::ios::binary) << manifest.to_json();
    return manifest;
}

}  // namespace prosim
