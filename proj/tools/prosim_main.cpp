// prosim command-line front end.
//
// Exit codes: 0 ok, 1 usage or bad config, 2 invalid data, 3 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prosim/fleet.hpp"
#include "prosim/profiles.hpp"
#include "prosim/scenario.hpp"

namespace {

using namespace prosim;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
        out.push_back(f);
    }
    return out;
}

double number_or_throw(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    }
}

// timestamp,net_kw[,underlying_kw]; contiguous half-hours starting at midnight
std::pair<AggregateProfile, AggregateProfile> read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    AggregateProfile net, base;
    net.scenario = "profile";
    base.scenario = "underlying";
    bool has_underlying = false;
    std::string line;
    std::size_t line_no = 0;
    LocalMinutes first{};
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = split_fields(line);
        if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
        if (net.net_kw.empty() && !f[0].empty() && !std::isdigit(static_cast<unsigned char>(f[0][0]))) {
            has_underlying = f.size() >= 3;
            continue;  // header
        }
        if (f.size() < 2) throw DataError("line " + std::to_string(line_no) + ": expected timestamp,net_kw");
        LocalMinutes t;
        try {
            t = parse_timestamp(f[0]);
        } catch (const std::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (net.net_kw.empty()) {
            first = t;
            if (t != std::chrono::floor<std::chrono::days>(t))
                throw DataError("line " + std::to_string(line_no) + ": profile must start at 00:00");
            net.start_date = base.start_date = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(t)};
        } else if (t != first + std::chrono::minutes{30} * static_cast<int>(net.net_kw.size())) {
            throw DataError("line " + std::to_string(line_no) + ": timestamps must be contiguous half-hours");
        }
        net.net_kw.push_back(number_or_throw(f[1], line_no));
        if (f.size() >= 3) {
            has_underlying = true;
            base.net_kw.push_back(number_or_throw(f[2], line_no));
        }
    }
    if (net.net_kw.empty() || net.net_kw.size() % kIntervalsPerDay != 0)
        throw DataError(path + ": profile must cover whole days of 48 intervals");
    if (!has_underlying) base.net_kw = net.net_kw;
    if (base.net_kw.size() != net.net_kw.size()) throw DataError(path + ": underlying column is incomplete");
    return {net, base};
}

void print_report(const FleetDataset& input, const FleetDataset& kept, const ValidationReport& report) {
    for (const auto& r : report.rejections) std::cout << "rejected " << r.household_id << ": " << r.reason << '\n';
    std::cout << "households " << input.households.size() << " kept " << kept.households.size() << " rejected "
              << report.rejections.size() << '\n';
}

void print_summary(const DatasetSummary& s) {
    std::printf("households            %zu\n", s.households);
    std::printf("total_demand_mwh      %.3f\n", s.total_annual_demand_mwh);
    std::printf("mean_demand_mwh       %.4f\n", s.mean_annual_demand_mwh);
    std::printf("capacity_factor       %.4f\n", s.mean_capacity_factor);
    std::printf("peak_demand_kw        %.2f\n", s.peak_demand_kw);
    std::printf("peak_time             %s\n", format_timestamp(s.peak_time).c_str());
}

std::vector<double> parse_fit_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& f : split_fields(text)) {
        if (f.empty()) continue;
        try {
            out.push_back(std::stod(f));
        } catch (const std::exception&) {
            throw ConfigError("--fit: not a number: " + f);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prosumer PV-battery investment and fleet grid-impact simulator"};
    app.set_version_flag("--version", std::string(software_version()));
    app.require_subcommand(1);
    app.fallthrough();

    long long seed = 0;
    app.add_option("--seed", seed, "Reserved; the model is deterministic");

    std::string data, config, profile_csv, raw, capacities, out, fit, sensitivity;
    std::vector<std::string> trace;
    int workers = -1;

    auto* validate = app.add_subcommand("validate", "Validate a normalised dataset and report rejected households");
    validate->add_option("data", data, "Normalised CSV")->required();
    validate->add_option("--out", out, "Write the filtered dataset here");

    auto* summary = app.add_subcommand("summary", "Summary statistics of the filtered dataset");
    summary->add_option("data", data, "Normalised CSV")->required();

    auto* run = app.add_subcommand("run", "Run every FiT scenario in a config file");
    run->add_option("config", config, "Config file")->required();
    run->add_option("--out", out, "Output directory (overrides config)");
    run->add_option("--workers", workers, "Household worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    run->add_option("--fit", fit, "Comma-separated FiT fractions (overrides config)");
    run->add_option("--sensitivity", sensitivity, "reference, low or high");
    run->add_option("--trace", trace, "Household ids whose dispatch is dumped")->delimiter(',');

    auto* metrics = app.add_subcommand("metrics", "Grid metrics of a standalone profile CSV");
    metrics->add_option("profile", profile_csv, "CSV: timestamp,net_kw[,underlying_kw]")->required();
    metrics->add_option("--out", out, "Directory for metrics.csv and curves.csv (default: metrics row to stdout)");

    auto* convert = app.add_subcommand("convert-ausgrid", "Convert a gross-meter CSV to the normalised layout");
    convert->add_option("raw", raw, "Raw meter CSV")->required();
    convert->add_option("capacities", capacities, "household_id,capacity_kwp CSV")->required();
    convert->add_option("--out", out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kUsage;
    }

    try {
        if (*validate) {
            const auto input = read_normalised_csv(data);
            auto [kept, report] = validate_and_filter(input);
            print_report(input, kept, report);
            if (!out.empty()) write_normalised_csv(out, kept);
            return report.clean() ? kOk : kData;
        }
        if (*summary) {
            const auto input = read_normalised_csv(data);
            auto [kept, report] = validate_and_filter(input);
            if (!report.clean())
                std::cerr << "filtered out " << report.rejections.size() << " of " << input.households.size()
                          << " households\n";
            if (kept.households.empty()) throw DataError("no valid households in " + data);
            print_summary(dataset_summary(kept));
            return kOk;
        }
        if (*run) {
            auto suite = load_config(config);
            if (!out.empty()) suite.output_dir = out;
            if (workers >= 0) suite.workers = workers;
            if (!fit.empty()) suite.fit_fractions = parse_fit_list(fit);
            if (!sensitivity.empty()) suite.sensitivity = parse_sensitivity(sensitivity);
            if (!trace.empty()) suite.trace_households = trace;
            suite.validate();
            const auto manifest = run_suite(suite);
            std::cout << manifest.to_json() << '\n';
            return kOk;
        }
        if (*metrics) {
            const auto [profile, underlying] = read_profile_csv(profile_csv);
            FleetYearReport r;
            r.scenario = "profile";
            r.year = 1;
            r.calendar_year = static_cast<int>(profile.start_date.year());
            r.stage = classify_stage(0.0, 0.0);
            r.metrics = compute_metrics(profile, underlying);
            if (out.empty()) {
                write_metrics_header(std::cout);
                write_metrics_row(std::cout, r);
                return kOk;
            }
            std::filesystem::create_directories(out);
            std::ofstream m(std::filesystem::path(out) / "metrics.csv"), c(std::filesystem::path(out) / "curves.csv");
            if (!m || !c) throw std::runtime_error("cannot write to " + out);
            write_metrics_header(m);
            write_metrics_row(m, r);
            write_curves_header(c);
            write_curves(c, r);
            return kOk;
        }
        if (*convert) {
            const auto result = import_gross_meter_csv(raw, read_capacity_map(capacities));
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
            if (out.empty())
                write_normalised_csv(std::cout, result.dataset);
            else
                write_normalised_csv(out, result.dataset);
            std::cerr << "converted " << result.dataset.households.size() << " households\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
