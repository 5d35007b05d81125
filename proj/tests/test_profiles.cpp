#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "prosim/profiles.hpp"
#include "synthetic_fleet.hpp"

using namespace prosim;

namespace {

std::string csv_of(const FleetDataset& d) {
    std::ostringstream out;
    write_normalised_csv(out, d);
    return out.str();
}

FleetDataset small_fleet(std::size_t n) { return synth::make_fleet({n, 7, 15.4}); }

}  // namespace

TEST_CASE("timestamps") {
    const Date d{std::chrono::year{2012}, std::chrono::July, std::chrono::day{1}};
    CHECK(format_timestamp(interval_start(d, 0)) == "2012-07-01T00:00:00");
    CHECK(format_timestamp(interval_start(d, 27)) == "2012-07-01T13:30:00");
    CHECK(format_timestamp(interval_start(d, 48)) == "2012-07-02T00:00:00");
    CHECK(format_timestamp(interval_start(d, kIntervalsPerYear - 1)) == "2013-06-30T23:30:00");
    CHECK(parse_timestamp("2012-07-01T13:30:00") == interval_start(d, 27));
    CHECK(parse_timestamp("2012-07-01 13:30") == interval_start(d, 27));
    CHECK(parse_timestamp("1/07/2012 13:30") == interval_start(d, 27));
    CHECK_THROWS_AS(parse_timestamp("garbage"), DataError);
    CHECK(energy_to_power(0.5) == 1.0);
    CHECK(power_to_energy(2.0) == 1.0);
}

TEST_CASE("summary of a constant household") {
    FleetDataset d;
    d.households.push_back(fixtures::constant_household(0.5, 0.0));
    const auto s = dataset_summary(d);
    CHECK(s.households == 1);
    CHECK(s.total_annual_demand_mwh == doctest::Approx(8.76).epsilon(1e-12));
    CHECK(s.mean_annual_demand_mwh == doctest::Approx(8.76).epsilon(1e-12));
    CHECK(s.peak_demand_kw == doctest::Approx(1.0));
    CHECK(s.peak_interval == 0);  // ties go to the earliest interval
    CHECK(s.mean_capacity_factor == 0.0);
}

TEST_CASE("capacity factor is annual insolation over 8760 h") {
    FleetDataset d;
    d.households.push_back(fixtures::constant_household(0.1, 0.25, "A"));
    d.households.push_back(fixtures::constant_household(0.1, 0.05, "B"));
    const auto s = dataset_summary(d);
    CHECK(s.mean_capacity_factor == doctest::Approx((0.5 + 0.1) / 2));
    CHECK_THROWS_AS(dataset_summary(FleetDataset{}), DataError);
}

TEST_CASE("summary totals are the sum of per-household totals under any partition") {
    const auto fleet = small_fleet(6);
    const auto whole = dataset_summary(fleet);
    double parts = 0.0;
    for (std::size_t split = 1; split < 6; ++split) {
        FleetDataset a, b;
        for (std::size_t i = 0; i < 6; ++i) (i < split ? a : b).households.push_back(fleet.households[i]);
        parts = dataset_summary(a).total_annual_demand_mwh + dataset_summary(b).total_annual_demand_mwh;
        CHECK(parts == doctest::Approx(whole.total_annual_demand_mwh).epsilon(1e-12));
    }
    double by_household = 0.0;
    for (const auto& h : fleet.households) {
        FleetDataset one;
        one.households.push_back(h);
        by_household += dataset_summary(one).total_annual_demand_mwh;
    }
    CHECK(by_household == doctest::Approx(whole.total_annual_demand_mwh).epsilon(1e-12));
}

TEST_CASE("validation reasons") {
    auto bad = [](auto mutate) {
        FleetDataset d;
        d.households.push_back(fixtures::constant_household(0.3, 0.1, "X"));
        mutate(d.households[0]);
        auto [kept, report] = validate_and_filter(d);
        CHECK(kept.households.empty());
        REQUIRE(report.rejections.size() == 1);
        CHECK(report.rejections[0].household_id == "X");
        return report.rejections[0].reason;
    };
    CHECK(bad([](HouseholdProfile& h) { h.demand[26] = std::numeric_limits<double>::quiet_NaN(); }) == "gap");
    CHECK(bad([](HouseholdProfile& h) { h.demand[100] = -0.01; }) == "negative value");
    CHECK(bad([](HouseholdProfile& h) { h.insolation[100] = -0.01; }) == "negative value");
    CHECK(bad([](HouseholdProfile& h) { h.insolation[100] = 0.5000001; }) == "insolation exceeds nameplate");
    CHECK(bad([](HouseholdProfile& h) { h.demand.pop_back(); }) == "length");
    CHECK(bad([](HouseholdProfile& h) { h.duplicate_rows = 1; }) == "duplicate");
    CHECK(bad([](HouseholdProfile& h) { h.out_of_range_rows = 2; }) == "out of range");
    // 0.5 itself is allowed
    FleetDataset ok;
    ok.households.push_back(fixtures::constant_household(0.3, 0.5));
    CHECK(validate_and_filter(ok).second.clean());
}

TEST_CASE("duplicate household ids keep the first") {
    FleetDataset d;
    d.households.push_back(fixtures::constant_household(0.3, 0.1, "X"));
    d.households.push_back(fixtures::constant_household(0.4, 0.1, "X"));
    auto [kept, report] = validate_and_filter(d);
    REQUIRE(kept.households.size() == 1);
    CHECK(kept.households[0].demand[0] == 0.3);
    REQUIRE(report.rejections.size() == 1);
    CHECK(report.rejections[0].reason == "duplicate household id");
}

TEST_CASE("clean dataset passes unchanged and filtering is idempotent") {
    auto fleet = small_fleet(4);
    fleet.households[2].demand[5000] = -1.0;
    auto [once, r1] = validate_and_filter(fleet);
    auto [twice, r2] = validate_and_filter(once);
    CHECK(r1.rejections.size() == 1);
    CHECK(r2.clean());
    CHECK(csv_of(once) == csv_of(twice));

    const auto clean = small_fleet(3);
    auto [same, report] = validate_and_filter(clean);
    CHECK(report.clean());
    CHECK(csv_of(same) == csv_of(clean));
}

TEST_CASE("normalised CSV round-trips bit for bit") {
    const auto fleet = small_fleet(3);
    std::istringstream in(csv_of(fleet));
    const auto back = read_normalised_csv(in);
    REQUIRE(back.households.size() == 3);
    for (std::size_t h = 0; h < 3; ++h) {
        CHECK(back.households[h].household_id == fleet.households[h].household_id);
        CHECK(back.households[h].start_date == fleet.households[h].start_date);
        CHECK(back.households[h].demand == fleet.households[h].demand);
        CHECK(back.households[h].insolation == fleet.households[h].insolation);
    }
    CHECK(validate_and_filter(back).second.clean());
}

TEST_CASE("a missing row becomes a gap") {
    const auto fleet = small_fleet(1);
    std::string text = csv_of(fleet);
    const auto at = text.find("2012-07-01T13:00:00");
    REQUIRE(at != std::string::npos);
    const auto line_start = text.rfind('\n', at) + 1;
    text.erase(line_start, text.find('\n', at) + 1 - line_start);
    std::istringstream in(text);
    auto [kept, report] = validate_and_filter(read_normalised_csv(in));
    CHECK(kept.households.empty());
    REQUIRE(report.rejections.size() == 1);
    CHECK(report.rejections[0].reason == "gap");
}

TEST_CASE("a repeated row is a duplicate") {
    const auto fleet = small_fleet(1);
    std::string text = csv_of(fleet);
    const auto first_row_end = text.find('\n', text.find('\n') + 1) + 1;
    const auto second_line = text.substr(text.find('\n') + 1, first_row_end - text.find('\n') - 1);
    text += second_line;
    std::istringstream in(text);
    const auto d = read_normalised_csv(in);
    CHECK(first_violation(d.households.at(0)) == "duplicate");
}

TEST_CASE("normalised reader rejects malformed rows with line numbers") {
    std::istringstream bad_header("id,ts,d,i\n");
    CHECK_THROWS_AS(read_normalised_csv(bad_header), DataError);
    std::istringstream bad_number(
        "household_id,timestamp_iso8601,demand_kwh,insolation_kwh_per_kwp\nH,2012-07-01T00:00:00,abc,0\n");
    try {
        read_normalised_csv(bad_number);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

namespace {

std::string long_layout_year(const std::string& id, double gc, double cl, double gg, int skip_interval = -1) {
    std::ostringstream out;
    const Date d{std::chrono::year{2012}, std::chrono::July, std::chrono::day{1}};
    for (std::size_t i = 0; i < kIntervalsPerYear; ++i) {
        if (static_cast<int>(i) == skip_interval) continue;
        const auto ts = format_timestamp(interval_start(d, i));
        out << id << ',' << ts << ",GC," << gc << '\n';
        if (cl > 0) out << id << ',' << ts << ",CL," << cl << '\n';
        out << id << ',' << ts << ",GG," << gg << '\n';
    }
    return out.str();
}

}  // namespace

TEST_CASE("gross-meter import, long layout") {
    std::istringstream in("household_id,timestamp,channel,kwh\n" + long_layout_year("B", 0.2, 0.1, 0.6) +
                          long_layout_year("A", 0.4, 0, 0.3));
    const auto r = import_gross_meter_csv(in, {{"A", 1.0}, {"B", 2.0}});
    REQUIRE(r.dataset.households.size() == 2);
    CHECK(r.dataset.households[0].household_id == "A");  // sorted by id
    const auto& b = r.dataset.households[1];
    CHECK(b.insolation[10] == doctest::Approx(0.3));  // 0.6 kWh / 2 kW_P
    CHECK(b.demand[10] == doctest::Approx(0.3));      // GC + CL
    CHECK(validate_and_filter(r.dataset).second.clean());
}

TEST_CASE("gross-meter import errors") {
    std::istringstream unknown("household_id,timestamp,channel,kwh\nA,2012-07-01T00:00:00,GC,0.1\nA,2012-07-01T00:00:00,XX,0.1\n");
    try {
        import_gross_meter_csv(unknown, {{"A", 1.0}});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("unknown channel") != std::string::npos);
    }
    std::istringstream no_capacity("household_id,timestamp,channel,kwh\nZ9,2012-07-01T00:00:00,GG,0.1\n");
    try {
        import_gross_meter_csv(no_capacity, {});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("Z9") != std::string::npos);
    }
    std::istringstream empty("");
    const auto r = import_gross_meter_csv(empty, {});
    CHECK(r.dataset.households.empty());
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("gross-meter import, gaps survive to the filter") {
    std::istringstream in("household_id,timestamp,channel,kwh\n" + long_layout_year("A", 0.2, 0, 0.2, 26) +
                          long_layout_year("B", 0.2, 0, 0.2));
    const auto r = import_gross_meter_csv(in, {{"A", 1.0}, {"B", 1.0}});
    auto [kept, report] = validate_and_filter(r.dataset);
    REQUIRE(kept.households.size() == 1);
    CHECK(kept.households[0].household_id == "B");
    CHECK(report.rejections.at(0).reason == "gap");
}

TEST_CASE("gross-meter import, wide layout") {
    std::ostringstream raw;
    raw << "Solar home electricity data,,,,\n";
    raw << "Customer,Generator Capacity,Postcode,Consumption Category,date";
    for (int k = 1; k <= 48; ++k) raw << ',' << (k / 2) << ':' << (k % 2 ? "30" : "00");
    raw << ",Row Quality\n";
    const Date start{std::chrono::year{2012}, std::chrono::July, std::chrono::day{1}};
    for (std::size_t day = 0; day < kDaysPerYear; ++day) {
        const std::chrono::year_month_day ymd{std::chrono::sys_days{start} + std::chrono::days{static_cast<int>(day)}};
        char date[16];
        std::snprintf(date, sizeof date, "%u/%02u/%d", static_cast<unsigned>(ymd.day()),
                      static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()));
        for (const char* ch : {"GC", "CL", "GG"}) {
            raw << "7,1.5,2076," << ch << ',' << date;
            for (int k = 0; k < 48; ++k) {
                double v = 0.0;
                if (std::string(ch) == "GC") v = 0.01 * k;
                if (std::string(ch) == "CL") v = k < 12 ? 0.5 : 0.0;
                if (std::string(ch) == "GG") v = (k >= 14 && k < 36) ? 0.45 : 0.0;
                raw << ',' << v;
            }
            raw << ",\n";
        }
    }
    std::istringstream in(raw.str());
    const auto r = import_gross_meter_csv(in, {{"7", 1.5}});
    REQUIRE(r.dataset.households.size() == 1);
    const auto& h = r.dataset.households[0];
    CHECK(h.start_date == start);
    CHECK(h.demand[0] == doctest::Approx(0.5));       // 00:00-00:30: GC 0 + CL 0.5
    CHECK(h.demand[13] == doctest::Approx(0.13));
    CHECK(h.insolation[14] == doctest::Approx(0.3));  // 0.45 / 1.5
    CHECK(h.insolation[13] == 0.0);
    CHECK(validate_and_filter(r.dataset).second.clean());
}

TEST_CASE("capacity map") {
    std::istringstream in("household_id,declared_kwp\nA,1.5\nB,3\n");
    const auto m = read_capacity_map(in);
    CHECK(m.at("A") == 1.5);
    CHECK(m.at("B") == 3.0);
    std::istringstream bad("A,0\n");
    CHECK_THROWS_AS(read_capacity_map(bad), DataError);
}
