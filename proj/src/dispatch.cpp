#include "prosim/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "csv_util.hpp"

namespace prosim {

void TechnicalParams::validate() const {
    auto fraction = [](double v, const char* name) {
        if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in (0, 1]");
    };
    fraction(round_trip_efficiency, "round_trip_efficiency");
    fraction(depth_of_discharge, "depth_of_discharge");
    fraction(pv_end_of_life_fraction, "pv_end_of_life_fraction");
    fraction(battery_end_of_life_fraction, "battery_end_of_life_fraction");
    if (pv_lifetime_years <= 0 || battery_lifetime_years <= 0)
        throw std::invalid_argument("asset lifetimes must be positive");
    if (!(battery_power_limit_kw > 0.0)) throw std::invalid_argument("battery_power_limit_kw must be positive");
}

double TechnicalParams::charge_efficiency() const { return std::sqrt(round_trip_efficiency); }
double TechnicalParams::discharge_efficiency() const { return std::sqrt(round_trip_efficiency); }

double TechnicalParams::pv_derating(int age) const {
    if (age < 0 || age >= pv_lifetime_years) return 0.0;
    return 1.0 - (1.0 - pv_end_of_life_fraction) * age / pv_lifetime_years;
}

double TechnicalParams::battery_derating(int age) const {
    if (age < 0 || age >= battery_lifetime_years) return 0.0;
    return 1.0 - (1.0 - battery_end_of_life_fraction) * age / battery_lifetime_years;
}

void AssetLedger::add_pv(int install_year, double kwp) {
    if (!(kwp > 0.0)) throw std::invalid_argument("PV vintage capacity must be positive");
    pv_.push_back({install_year, kwp});
}

void AssetLedger::add_battery(int install_year, double kwh) {
    if (!(kwh > 0.0)) throw std::invalid_argument("battery vintage capacity must be positive");
    battery_.push_back({install_year, kwh});
}

double AssetLedger::nominal_pv(int year, const TechnicalParams& params) const {
    double total = 0.0;
    for (const auto& v : pv_)
        if (params.pv_derating(year - v.install_year) > 0.0) total += v.capacity;
    return total;
}

double AssetLedger::nominal_battery(int year, const TechnicalParams& params) const {
    double total = 0.0;
    for (const auto& v : battery_)
        if (params.battery_derating(year - v.install_year) > 0.0) total += v.capacity;
    return total;
}

double AssetLedger::effective_pv(int year, const TechnicalParams& params) const {
    double total = 0.0;
    for (const auto& v : pv_) total += v.capacity * params.pv_derating(year - v.install_year);
    return total;
}

void AssetLedger::retire(int year, const TechnicalParams& params) {
    std::erase_if(pv_, [&](const Vintage& v) { return year - v.install_year >= params.pv_lifetime_years; });
    std::erase_if(battery_, [&](const Vintage& v) { return year - v.install_year >= params.battery_lifetime_years; });
}

std::vector<double> pv_generation(const HouseholdProfile& profile, const AssetLedger& ledger, int year,
                                  const TechnicalParams& params) {
    const double kw = ledger.effective_pv(year, params);
    std::vector<double> out(profile.insolation.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = kw * profile.insolation[i];
    return out;
}

double usable_battery_capacity(const AssetLedger& ledger, int year, const TechnicalParams& params) {
    double total = 0.0;
    for (const auto& v : ledger.battery())
        total += v.capacity * params.battery_derating(year - v.install_year) * params.depth_of_discharge;
    return total;
}

std::vector<YearState> year_states(const AssetLedger& ledger, const TechnicalParams& params, int start_year,
                                   int horizon) {
    std::vector<YearState> out;
    out.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
    for (int y = start_year; y < start_year + horizon; ++y)
        out.push_back({ledger.effective_pv(y, params), usable_battery_capacity(ledger, y, params)});
    return out;
}

namespace {

struct Conversion {
    double power_energy;
    double eta_c;
    double eta_d;
    double inv_eta_c;
    double inv_eta_d;

    explicit Conversion(const TechnicalParams& p)
        : power_energy(p.power_limit_energy()),
          eta_c(p.charge_efficiency()),
          eta_d(p.discharge_efficiency()),
          inv_eta_c(1.0 / p.charge_efficiency()),
          inv_eta_d(1.0 / p.discharge_efficiency()) {}
};

struct Flows {
    double generation;
    double grid_import;
    double grid_export;
    double pv_direct;
    double charge_in;
    double discharge_out;
};

// One year of greedy self-consumption dispatch. The sink sees every interval;
// a sink that only accumulates totals lets the compiler drop the rest.
template <class Sink>
double dispatch_year(std::span<const double> demand, std::span<const double> insolation, YearState state,
                     const Conversion& c, double soc, Sink&& sink) {
    const double capacity = state.usable_kwh;
    soc = std::min(soc, capacity);
    const std::size_t n = demand.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double generation = state.pv_kw * insolation[i];
        const double net = demand[i] - generation;
        Flows f{generation, 0.0, 0.0, 0.0, 0.0, 0.0};
        if (net < 0.0) {
            const double excess = -net;
            const double limit = std::min(excess, c.power_energy);
            const double headroom_in = (capacity - soc) * c.inv_eta_c;
            if (headroom_in <= limit) {
                f.charge_in = headroom_in;
                soc = capacity;
            } else {
                f.charge_in = limit;
                soc += limit * c.eta_c;
            }
            f.grid_export = excess - f.charge_in;
            f.pv_direct = demand[i];
        } else {
            const double limit = std::min(net, c.power_energy);
            const double available_out = soc * c.eta_d;
            if (available_out <= limit) {
                f.discharge_out = available_out;
                soc = 0.0;
            } else {
                f.discharge_out = limit;
                soc -= limit * c.inv_eta_d;
            }
            f.grid_import = net - f.discharge_out;
            f.pv_direct = generation;
        }
        sink(i, f, soc);
    }
    return soc;
}

// GCC/Clang vector extension; lowers to whatever SIMD the target has.
typedef double Lanes __attribute__((vector_size(kDispatchLanes * sizeof(double))));

inline bool all_empty(const Lanes& soc) {
    for (std::size_t l = 0; l < kDispatchLanes; ++l)
        if (soc[l] != 0.0) return false;
    return true;
}

// Same arithmetic as dispatch_year, branch-free per lane. std::min(a, b) is
// (b < a) ? b : a, kept in that form so every lane matches the scalar kernel.
// Vectors travel by reference: by-value vector arguments change the ABI without AVX.
// The AVX2 clone is picked at load time; no FMA, so it rounds like the default one.
#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__) && !defined(__AVX2__)
__attribute__((target_clones("avx2", "default")))
#endif
void dispatch_year_lanes(std::span<const double> demand, std::span<const double> insolation,
                         const DispatchIndex* index, const Lanes& pv, const Lanes& capacity, const Conversion& c,
                         Lanes& soc_io, Lanes& imported_out, Lanes& exported_out) {
    // locals, so the compiler need not assume they alias the profile
    const Lanes zero = {};
    Lanes soc = soc_io, imported = zero, exported = zero;
    const Lanes power = zero + c.power_energy;
    const Lanes eta_c = zero + c.eta_c, eta_d = zero + c.eta_d;
    const Lanes inv_eta_c = zero + c.inv_eta_c, inv_eta_d = zero + c.inv_eta_d;
    soc = capacity < soc ? capacity : soc;
    const std::size_t n = demand.size();
    std::size_t i = 0;
    while (i < n) {
        if (index && insolation[i] == 0.0 && all_empty(soc)) {
            // empty and dark: import = demand, interval by interval as the scalar kernel sums it
            const std::size_t j = index->next_sunlit[i];
            for (; i < j; ++i) imported += demand[i] - zero;
            continue;
        }
        const Lanes net = demand[i] - pv * insolation[i];
        const auto charging = net < zero;

        const Lanes excess = -net;
        const Lanes limit_in = power < excess ? power : excess;
        const Lanes headroom_in = (capacity - soc) * inv_eta_c;
        const auto full = headroom_in <= limit_in;
        const Lanes charge_in = full ? headroom_in : limit_in;
        const Lanes soc_in = full ? capacity : soc + limit_in * eta_c;

        const Lanes limit_out = power < net ? power : net;
        const Lanes available_out = soc * eta_d;
        const auto empty = available_out <= limit_out;
        const Lanes discharge_out = empty ? available_out : limit_out;
        const Lanes soc_out = empty ? zero : soc - limit_out * inv_eta_d;

        soc = charging ? soc_in : soc_out;
        exported += charging ? excess - charge_in : zero;
        imported += charging ? zero : net - discharge_out;
        ++i;
    }
    soc_io = soc;
    imported_out = imported;
    exported_out = exported;
}

}  // namespace

DispatchIndex DispatchIndex::build(std::span<const double> demand, std::span<const double> insolation) {
    if (demand.size() != insolation.size()) throw std::invalid_argument("demand/insolation length mismatch");
    const std::size_t n = demand.size();
    DispatchIndex idx;
    idx.demand_prefix.resize(n + 1);
    idx.next_sunlit.resize(n + 1);
    idx.demand_prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) idx.demand_prefix[i + 1] = idx.demand_prefix[i] + demand[i];
    idx.next_sunlit[n] = static_cast<std::uint32_t>(n);
    for (std::size_t i = n; i-- > 0;)
        idx.next_sunlit[i] = insolation[i] > 0.0 ? static_cast<std::uint32_t>(i) : idx.next_sunlit[i + 1];
    return idx;
}

namespace {

// Totals-only variant of dispatch_year. Once the battery is empty and the sun
// is down, every interval imports its full demand until the next sunlit one.
double dispatch_year_indexed(std::span<const double> demand, std::span<const double> insolation,
                             const DispatchIndex& index, YearState state, const Conversion& c, double soc,
                             AnnualEnergy& out) {
    const double capacity = state.usable_kwh;
    soc = std::min(soc, capacity);
    const std::size_t n = demand.size();
    double imported = 0.0, exported = 0.0;
    std::size_t i = 0;
    while (i < n) {
        if (soc == 0.0 && insolation[i] == 0.0) {
            const std::size_t j = index.next_sunlit[i];
            imported += index.demand_prefix[j] - index.demand_prefix[i];
            i = j;
            continue;
        }
        const double net = demand[i] - state.pv_kw * insolation[i];
        if (net < 0.0) {
            const double excess = -net;
            const double limit = std::min(excess, c.power_energy);
            const double headroom_in = (capacity - soc) * c.inv_eta_c;
            double charge_in;
            if (headroom_in <= limit) {
                charge_in = headroom_in;
                soc = capacity;
            } else {
                charge_in = limit;
                soc += limit * c.eta_c;
            }
            exported += excess - charge_in;
        } else {
            const double limit = std::min(net, c.power_energy);
            const double available_out = soc * c.eta_d;
            double discharge_out;
            if (available_out <= limit) {
                discharge_out = available_out;
                soc = 0.0;
            } else {
                discharge_out = limit;
                soc -= limit * c.inv_eta_d;
            }
            imported += net - discharge_out;
        }
        ++i;
    }
    out = {imported, exported};
    return soc;
}

}  // namespace

double dispatch_totals(std::span<const double> demand, std::span<const double> insolation,
                       std::span<const YearState> years, const TechnicalParams& params, double initial_soc,
                       std::span<AnnualEnergy> annual, const DispatchIndex* index) {
    if (demand.size() != insolation.size()) throw std::invalid_argument("demand/insolation length mismatch");
    if (annual.size() < years.size()) throw std::invalid_argument("annual output too short");
    if (index && index->demand_prefix.size() != demand.size() + 1)
        throw std::invalid_argument("dispatch index built for a different profile");
    const Conversion c(params);
    double soc = initial_soc;
    for (std::size_t y = 0; y < years.size(); ++y) {
        if (index) {
            soc = dispatch_year_indexed(demand, insolation, *index, years[y], c, soc, annual[y]);
            continue;
        }
        double imported = 0.0, exported = 0.0;
        soc = dispatch_year(demand, insolation, years[y], c, soc, [&](std::size_t, const Flows& f, double) {
            imported += f.grid_import;
            exported += f.grid_export;
        });
        annual[y] = {imported, exported};
    }
    return soc;
}

void dispatch_totals_batch(std::span<const double> demand, std::span<const double> insolation,
                           std::span<const YearState> years, std::size_t lanes, const TechnicalParams& params,
                           std::span<const double> initial_soc, std::span<AnnualEnergy> annual,
                           std::span<double> final_soc, const DispatchIndex* index) {
    if (demand.size() != insolation.size()) throw std::invalid_argument("demand/insolation length mismatch");
    if (lanes == 0 || lanes > kDispatchLanes) throw std::invalid_argument("dispatch_totals_batch: bad lane count");
    if (years.size() % lanes != 0) throw std::invalid_argument("dispatch_totals_batch: years not a multiple of lanes");
    if (initial_soc.size() < lanes) throw std::invalid_argument("dispatch_totals_batch: one initial SoC per lane");
    if (annual.size() < years.size()) throw std::invalid_argument("annual output too short");
    if (!final_soc.empty() && final_soc.size() < lanes) throw std::invalid_argument("final SoC output too short");
    if (index && index->demand_prefix.size() != demand.size() + 1)
        throw std::invalid_argument("dispatch index built for a different profile");
    const Conversion c(params);
    const std::size_t horizon = years.size() / lanes;

    // idle lanes repeat lane 0 so they never block the dark-stretch loop
    Lanes soc;
    for (std::size_t l = 0; l < kDispatchLanes; ++l) soc[l] = initial_soc[l < lanes ? l : 0];
    for (std::size_t y = 0; y < horizon; ++y) {
        Lanes pv, capacity, imported, exported;
        for (std::size_t l = 0; l < kDispatchLanes; ++l) {
            const auto& st = years[y * lanes + (l < lanes ? l : 0)];
            pv[l] = st.pv_kw;
            capacity[l] = st.usable_kwh;
        }
        dispatch_year_lanes(demand, insolation, index, pv, capacity, c, soc, imported, exported);
        for (std::size_t l = 0; l < lanes; ++l) annual[y * lanes + l] = {imported[l], exported[l]};
    }
    for (std::size_t l = 0; l < lanes && !final_soc.empty(); ++l) final_soc[l] = soc[l];
}

DispatchResult simulate_dispatch(const HouseholdProfile& profile, const AssetLedger& ledger,
                                 const TechnicalParams& params, int start_year, int horizon, double initial_soc) {
    if (horizon <= 0) throw std::invalid_argument("simulate_dispatch: horizon must be >= 1");
    const auto states = year_states(ledger, params, start_year, horizon);
    return simulate_dispatch(profile, states, params, start_year, initial_soc);
}

DispatchResult simulate_dispatch(const HouseholdProfile& profile, std::span<const YearState> states,
                                 const TechnicalParams& params, int start_year, double initial_soc) {
    if (states.empty()) throw std::invalid_argument("simulate_dispatch: horizon must be >= 1");
    if (profile.demand.size() != profile.insolation.size())
        throw std::invalid_argument("simulate_dispatch: demand/insolation length mismatch");
    params.validate();
    const int horizon = static_cast<int>(states.size());
    const std::size_t n = profile.demand.size();
    const std::size_t total = n * static_cast<std::size_t>(horizon);

    DispatchResult r;
    r.start_year = start_year;
    r.horizon = horizon;
    for (auto* v : {&r.generation, &r.grid_import, &r.grid_export, &r.pv_direct_use, &r.battery_charge_in,
                    &r.battery_discharge_out, &r.soc})
        v->resize(total);
    r.annual.resize(static_cast<std::size_t>(horizon));

    const Conversion c(params);
    double soc = initial_soc;
    for (std::size_t y = 0; y < states.size(); ++y) {
        const std::size_t base = y * n;
        double imported = 0.0, exported = 0.0;
        soc = dispatch_year(profile.demand, profile.insolation, states[y], c, soc,
                            [&](std::size_t i, const Flows& f, double s) {
                                const std::size_t k = base + i;
                                r.generation[k] = f.generation;
                                r.grid_import[k] = f.grid_import;
                                r.grid_export[k] = f.grid_export;
                                r.pv_direct_use[k] = f.pv_direct;
                                r.battery_charge_in[k] = f.charge_in;
                                r.battery_discharge_out[k] = f.discharge_out;
                                r.soc[k] = s;
                                imported += f.grid_import;
                                exported += f.grid_export;
                            });
        r.annual[y] = {imported, exported};
    }
    r.final_soc = soc;
    return r;
}

std::vector<double> DispatchResult::residual(int horizon_year) const {
    const std::size_t n = size() / static_cast<std::size_t>(horizon);
    const std::size_t base = n * static_cast<std::size_t>(horizon_year);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = grid_import[base + i] - grid_export[base + i];
    return out;
}

std::vector<AnnualEnergy> annual_energy_summary(const DispatchResult& result) {
    std::vector<AnnualEnergy> out(static_cast<std::size_t>(result.horizon));
    if (result.horizon <= 0) return out;
    const std::size_t n = result.size() / static_cast<std::size_t>(result.horizon);
    for (std::size_t y = 0; y < out.size(); ++y) {
        for (std::size_t i = y * n; i < (y + 1) * n; ++i) {
            out[y].import_kwh += result.grid_import[i];
            out[y].export_kwh += result.grid_export[i];
        }
    }
    return out;
}

void write_dispatch_trace(std::ostream& out, const HouseholdProfile& profile, const DispatchResult& r, bool header) {
    using detail::format_double;
    if (header)
        out << "household_id,year,timestamp_iso8601,demand_kwh,generation_kwh,grid_import_kwh,grid_export_kwh,"
               "pv_direct_kwh,battery_charge_in_kwh,battery_discharge_out_kwh,soc_kwh\n";
    const std::size_t n = profile.demand.size();
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::size_t i = k % n;
        out << profile.household_id << ',' << r.start_year + static_cast<int>(k / n) << ','
            << format_timestamp(interval_start(profile.start_date, i)) << ',' << format_double(profile.demand[i])
            << ',' << format_double(r.generation[k]) << ',' << format_double(r.grid_import[k]) << ','
            << format_double(r.grid_export[k]) << ',' << format_double(r.pv_direct_use[k]) << ','
            << format_double(r.battery_charge_in[k]) << ',' << format_double(r.battery_discharge_out[k]) << ','
            << format_double(r.soc[k]) << '\n';
    }
}

}  // namespace prosim
