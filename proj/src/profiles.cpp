#include "prosim/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <optional>

#include "csv_util.hpp"

namespace prosim {

using namespace std::chrono;
using detail::format_double;
using detail::split;
using detail::trim;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool read_int(std::string_view s, int& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

LocalMinutes make_time(int y, unsigned mo, unsigned d, int hh, int mm) {
    year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date");
    return sys_days{ymd} + hours{hh} + minutes{mm};
}

// "d/mm/yyyy" as written by the Ausgrid export, or ISO "yyyy-mm-dd".
Date parse_date(std::string_view s) {
    s = trim(s);
    int y = 0, m = 0, d = 0;
    if (s.find('/') != std::string_view::npos) {
        auto parts = split(s, '/');
        if (parts.size() != 3 || !read_int(parts[0], d) || !read_int(parts[1], m) || !read_int(parts[2], y))
            throw DataError("invalid date '" + std::string(s) + "'");
    } else {
        auto parts = split(s, '-');
        if (parts.size() != 3 || !read_int(parts[0], y) || !read_int(parts[1], m) || !read_int(parts[2], d))
            throw DataError("invalid date '" + std::string(s) + "'");
    }
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid date '" + std::string(s) + "'");
    return ymd;
}

// Readings land in per-household slot arrays covering three years around the
// first timestamp seen, so unsorted input still finds the earliest interval.
// origin() and extract() cut the fleet-wide year out of that window.
constexpr std::int64_t kWindowBefore = static_cast<std::int64_t>(kIntervalsPerYear);
constexpr std::size_t kWindow = 3 * kIntervalsPerYear;

struct Slots {
    std::vector<double> demand;
    std::vector<double> generation;
    std::vector<std::uint8_t> seen;  // channel bits
    std::size_t duplicates = 0;
    std::size_t out_of_range = 0;
    bool has_generation = false;
};

enum ChannelBit : std::uint8_t { kGC = 1, kCL = 2, kGG = 4, kDemand = 8, kInsolation = 16 };

struct GridBuilder {
    std::optional<LocalMinutes> anchor;
    std::map<std::string, Slots> households;

    // `generation` selects the series; `bit` identifies the channel for duplicate
    // detection (consumption sub-channels GC and CL sum into demand).
    void add(const std::string& id, LocalMinutes t, bool generation, std::uint8_t bit, double value,
             std::size_t line) {
        if (!anchor) anchor = t;
        auto& s = households[id];
        if (s.seen.empty()) {
            s.demand.assign(kWindow, kNaN);
            s.generation.assign(kWindow, kNaN);
            s.seen.assign(kWindow, 0);
        }
        const auto offset = (t - *anchor).count();
        if (offset % 30 != 0)
            throw DataError("line " + std::to_string(line) + ": timestamp not on the 30-min grid");
        const auto idx = offset / 30 + kWindowBefore;
        if (idx < 0 || idx >= static_cast<std::int64_t>(kWindow)) {
            ++s.out_of_range;
            return;
        }
        const auto i = static_cast<std::size_t>(idx);
        if (s.seen[i] & bit) {
            ++s.duplicates;
            return;
        }
        s.seen[i] |= bit;
        auto& series = generation ? s.generation : s.demand;
        if (generation) s.has_generation = true;
        series[i] = std::isnan(series[i]) ? value : series[i] + value;
    }

    // Earliest populated slot across the fleet, aligned to its midnight.
    std::pair<Date, std::int64_t> origin() const {
        std::int64_t first = static_cast<std::int64_t>(kWindow);
        for (const auto& [id, s] : households)
            for (std::size_t i = 0; i < kWindow; ++i)
                if (s.seen[i]) {
                    first = std::min(first, static_cast<std::int64_t>(i));
                    break;
                }
        const LocalMinutes t = *anchor + minutes{30 * (first - kWindowBefore)};
        const auto midnight = floor<days>(t);
        const auto base = first - (t - midnight).count() / 30;
        return {Date{midnight}, base};
    }

    // Moves the year [base, base + 17520) out of the window; later readings count as out of range.
    static void extract(Slots& s, std::int64_t base, std::vector<double>& demand, std::vector<double>& generation,
                        std::size_t& out_of_range) {
        demand.assign(kIntervalsPerYear, kNaN);
        generation.assign(kIntervalsPerYear, kNaN);
        out_of_range = s.out_of_range;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(kWindow); ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (!s.seen[k]) continue;
            const auto rel = i - base;
            if (rel < 0 || rel >= static_cast<std::int64_t>(kIntervalsPerYear)) {
                ++out_of_range;
                continue;
            }
            demand[static_cast<std::size_t>(rel)] = s.demand[k];
            generation[static_cast<std::size_t>(rel)] = s.generation[k];
        }
        s = Slots{};
    }
};

}  // namespace

LocalMinutes interval_start(Date start, std::size_t interval) {
    return sys_days{start} + minutes{30 * static_cast<std::int64_t>(interval)};
}

std::string format_timestamp(LocalMinutes t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto mins = (t - day_point).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(mins / 60), static_cast<int>(mins % 60));
    return buf;
}

LocalMinutes parse_timestamp(std::string_view text) {
    text = trim(text);
    auto sep = text.find_first_of("T ");
    if (sep == std::string_view::npos) throw DataError("invalid timestamp '" + std::string(text) + "'");
    const Date d = parse_date(text.substr(0, sep));
    auto clock = split(text.substr(sep + 1), ':');
    int hh = 0, mm = 0;
    if (clock.size() < 2 || !read_int(clock[0], hh) || !read_int(clock[1], mm) || hh < 0 || hh > 23 || mm < 0 ||
        mm > 59)
        throw DataError("invalid timestamp '" + std::string(text) + "'");
    return make_time(static_cast<int>(d.year()), static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()),
                     hh, mm);
}

std::string first_violation(const HouseholdProfile& p) {
    if (p.demand.size() != kIntervalsPerYear || p.insolation.size() != kIntervalsPerYear) return "length";
    for (std::size_t i = 0; i < kIntervalsPerYear; ++i)
        if (!std::isfinite(p.demand[i]) || !std::isfinite(p.insolation[i])) return "gap";
    if (p.duplicate_rows > 0) return "duplicate";
    if (p.out_of_range_rows > 0) return "out of range";
    for (std::size_t i = 0; i < kIntervalsPerYear; ++i)
        if (p.demand[i] < 0.0 || p.insolation[i] < 0.0) return "negative value";
    for (double v : p.insolation)
        if (v > kMaxInsolationPerInterval) return "insolation exceeds nameplate";
    return {};
}

std::pair<FleetDataset, ValidationReport> validate_and_filter(const FleetDataset& dataset) {
    FleetDataset kept;
    kept.provenance = dataset.provenance;
    ValidationReport report;
    std::set<std::string> ids;
    for (const auto& h : dataset.households) {
        auto reason = first_violation(h);
        if (reason.empty() && !ids.insert(h.household_id).second) reason = "duplicate household id";
        if (reason.empty())
            kept.households.push_back(h);
        else
            report.rejections.push_back({h.household_id, std::move(reason)});
    }
    return {std::move(kept), std::move(report)};
}

DatasetSummary dataset_summary(const FleetDataset& dataset) {
    if (dataset.households.empty()) throw DataError("dataset_summary: empty dataset");
    DatasetSummary s;
    s.households = dataset.households.size();
    std::vector<double> aggregate(kIntervalsPerYear, 0.0);
    double capacity_factor_sum = 0.0;
    for (const auto& h : dataset.households) {
        if (h.demand.size() != kIntervalsPerYear || h.insolation.size() != kIntervalsPerYear)
            throw DataError("dataset_summary: household " + h.household_id + " is not a full year");
        double annual = 0.0;
        for (std::size_t i = 0; i < kIntervalsPerYear; ++i) {
            annual += h.demand[i];
            aggregate[i] += h.demand[i];
        }
        s.total_annual_demand_mwh += annual / 1000.0;
        double generation = 0.0;
        for (double v : h.insolation) generation += v;
        capacity_factor_sum += generation / (kHoursPerInterval * kIntervalsPerYear);
    }
    s.mean_annual_demand_mwh = s.total_annual_demand_mwh / static_cast<double>(s.households);
    s.mean_capacity_factor = capacity_factor_sum / static_cast<double>(s.households);
    const auto peak = std::max_element(aggregate.begin(), aggregate.end());
    s.peak_interval = static_cast<std::size_t>(peak - aggregate.begin());
    s.peak_demand_kw = energy_to_power(*peak);
    s.peak_time = interval_start(dataset.households.front().start_date, s.peak_interval);
    return s;
}

FleetDataset read_normalised_csv(std::istream& in, std::string provenance) {
    GridBuilder grid;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cols = split(line);
        if (!header_seen) {
            header_seen = true;
            if (cols.size() != 4 || detail::lower(cols[0]) != "household_id")
                throw DataError("line " + std::to_string(line_no) +
                                ": expected header household_id,timestamp_iso8601,demand_kwh,insolation_kwh_per_kwp");
            continue;
        }
        if (cols.size() != 4)
            throw DataError("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                            std::to_string(cols.size()));
        LocalMinutes t;
        try {
            t = parse_timestamp(cols[1]);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string id(cols[0]);
        const double demand = detail::parse_double_or_throw(cols[2], line_no, "demand");
        const double insolation = detail::parse_double_or_throw(cols[3], line_no, "insolation");
        // one row carries both channels, so a repeated row registers a single duplicate
        grid.add(id, t, false, kDemand, demand, line_no);
        const auto dups = grid.households[id].duplicates;
        grid.add(id, t, true, kInsolation, insolation, line_no);
        grid.households[id].duplicates = dups;
    }
    FleetDataset out;
    out.provenance = std::move(provenance);
    if (!grid.anchor) return out;
    const auto [start, base] = grid.origin();
    for (auto& [id, slots] : grid.households) {
        HouseholdProfile p;
        p.household_id = id;
        p.start_date = start;
        p.duplicate_rows = slots.duplicates;
        std::size_t oor = 0;
        GridBuilder::extract(slots, base, p.demand, p.insolation, oor);
        p.out_of_range_rows = oor;
        out.households.push_back(std::move(p));
    }
    return out;
}

FleetDataset read_normalised_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_normalised_csv(in, path.string());
}

void write_normalised_csv(std::ostream& out, const FleetDataset& dataset) {
    out << "household_id,timestamp_iso8601,demand_kwh,insolation_kwh_per_kwp\n";
    for (const auto& h : dataset.households) {
        const auto n = std::min(h.demand.size(), h.insolation.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(h.demand[i]) || std::isnan(h.insolation[i])) continue;
            out << h.household_id << ',' << format_timestamp(interval_start(h.start_date, i)) << ','
                << format_double(h.demand[i]) << ',' << format_double(h.insolation[i]) << '\n';
        }
    }
}

void write_normalised_csv(const std::filesystem::path& path, const FleetDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_normalised_csv(out, dataset);
}

std::map<std::string, double> read_capacity_map(std::istream& in) {
    std::map<std::string, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cols = split(line);
        if (line_no == 1 && detail::lower(cols[0]) == "household_id") continue;
        if (cols.size() < 2) throw DataError("line " + std::to_string(line_no) + ": expected household_id,declared_kwp");
        const double kwp = detail::parse_double_or_throw(cols[1], line_no, "declared_kwp");
        if (!(kwp > 0.0)) throw DataError("line " + std::to_string(line_no) + ": declared capacity must be > 0");
        out[std::string(cols[0])] = kwp;
    }
    return out;
}

std::map<std::string, double> read_capacity_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_capacity_map(in);
}

namespace {

std::uint8_t channel_bit(std::string_view tag) {
    const auto t = detail::lower(tag);
    if (t == "gc" || t == "consumption") return kGC;
    if (t == "cl") return kCL;
    if (t == "gg" || t == "generation") return kGG;
    return 0;
}

}  // namespace

ImportResult import_gross_meter_csv(std::istream& in, const std::map<std::string, double>& capacities) {
    ImportResult result;
    GridBuilder grid;
    enum class Layout { unknown, longform, wide } layout = Layout::unknown;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) { throw DataError("line " + std::to_string(line_no) + ": " + msg); };
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cols = split(line);
        if (layout == Layout::unknown) {
            const auto first = detail::lower(cols[0]);
            if (first == "household_id") {
                if (cols.size() != 4) fail("long layout needs 4 columns");
                layout = Layout::longform;
            } else if (first == "customer") {
                if (cols.size() < 5 + kIntervalsPerDay) fail("wide layout needs 48 interval columns");
                layout = Layout::wide;
            }
            // anything before the header (the export carries a title row) is skipped
            continue;
        }
        if (layout == Layout::longform) {
            if (cols.size() != 4) fail("expected 4 columns, got " + std::to_string(cols.size()));
            const auto bit = channel_bit(cols[2]);
            if (bit == 0) fail("unknown channel '" + std::string(cols[2]) + "'");
            LocalMinutes t;
            try {
                t = parse_timestamp(cols[1]);
            } catch (const DataError& e) {
                fail(e.what());
            }
            grid.add(std::string(cols[0]), t, bit == kGG, bit, detail::parse_double_or_throw(cols[3], line_no, "energy"),
                     line_no);
        } else {
            if (cols.size() < 5 + kIntervalsPerDay) fail("expected 48 interval columns");
            const auto bit = channel_bit(cols[3]);
            if (bit == 0) fail("unknown channel '" + std::string(cols[3]) + "'");
            Date d;
            try {
                d = parse_date(cols[4]);
            } catch (const DataError& e) {
                fail(e.what());
            }
            const std::string id(cols[0]);
            for (std::size_t k = 0; k < kIntervalsPerDay; ++k) {
                // column k is labelled by the interval end, so it starts 30*k minutes after midnight
                const LocalMinutes t = sys_days{d} + minutes{30 * static_cast<int>(k)};
                grid.add(id, t, bit == kGG, bit, detail::parse_double_or_throw(cols[5 + k], line_no, "energy"), line_no);
            }
        }
    }
    result.dataset.provenance = "gross-meter import";
    if (!grid.anchor) {
        result.warnings.emplace_back("input contains no readings; dataset is empty");
        return result;
    }
    for (const auto& [id, slots] : grid.households)
        if (slots.has_generation && !capacities.contains(id))
            throw DataError("household " + id + " has generation data but no declared capacity");
    const auto [start, base] = grid.origin();
    for (auto& [id, slots] : grid.households) {
        HouseholdProfile p;
        p.household_id = id;
        p.start_date = start;
        p.duplicate_rows = slots.duplicates;
        const bool has_generation = slots.has_generation;
        std::size_t oor = 0;
        GridBuilder::extract(slots, base, p.demand, p.insolation, oor);
        p.out_of_range_rows = oor;
        if (has_generation) {
            const double kwp = capacities.at(id);
            for (auto& v : p.insolation) v /= kwp;
        } else {
            result.warnings.push_back("household " + id + " has no generation readings");
        }
        result.dataset.households.push_back(std::move(p));
    }
    return result;
}

ImportResult import_gross_meter_csv(const std::filesystem::path& path, const std::map<std::string, double>& capacities) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    auto r = import_gross_meter_csv(in, capacities);
    r.dataset.provenance = "gross-meter import of " + path.string();
    return r;
}

}  // namespace prosim
