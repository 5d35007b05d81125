#include "prosim/investor.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "csv_util.hpp"

namespace prosim {

namespace {

// Grid values are step multiples; this absorbs representation error in max/step.
constexpr double kGridSlack = 1e-9;

std::size_t points(double max, double step) {
    return static_cast<std::size_t>(std::floor(max / step + kGridSlack)) + 1;
}

}  // namespace

void CandidateGrid::validate() const {
    if (!(pv_step > 0.0 && battery_step > 0.0)) throw std::invalid_argument("candidate steps must be positive");
    if (!(pv_max >= pv_step && battery_max >= battery_step))
        throw std::invalid_argument("candidate maxima must be at least one step");
    if (!(expansion_factor > 0.0)) throw std::invalid_argument("expansion_factor must be positive");
}

std::size_t CandidateGrid::pv_points() const { return points(pv_max, pv_step); }
std::size_t CandidateGrid::battery_points() const { return points(battery_max, battery_step); }
double CandidateGrid::largest_pv() const { return static_cast<double>(pv_points() - 1) * pv_step; }
double CandidateGrid::largest_battery() const { return static_cast<double>(battery_points() - 1) * battery_step; }

std::vector<Candidate> enumerate_candidates(const CandidateGrid& grid) {
    grid.validate();
    std::vector<Candidate> out;
    out.reserve(grid.pv_points() * grid.battery_points() - 1);
    for (std::size_t i = 0; i < grid.pv_points(); ++i)
        for (std::size_t j = 0; j < grid.battery_points(); ++j) {
            if (i == 0 && j == 0) continue;
            out.push_back({static_cast<double>(i) * grid.pv_step, static_cast<double>(j) * grid.battery_step});
        }
    return out;
}

Appraisal::Appraisal(const HouseholdProfile& household, const AssetLedger& ledger, int year,
                     const ScenarioParams& params, const TechnicalParams& tech)
    : household_(household), params_(params), tech_(tech), year_(year) {
    const int horizon = params.horizon_years;
    base_states_ = year_states(ledger, tech, year, horizon);
    base_nominal_pv_.resize(static_cast<std::size_t>(horizon));
    for (int n = 0; n < horizon; ++n) base_nominal_pv_[static_cast<std::size_t>(n)] = ledger.nominal_pv(year + n, tech);

    index_ = DispatchIndex::build(household.demand, household.insolation);
    std::vector<AnnualEnergy> energy(static_cast<std::size_t>(horizon));
    const double empty = 0.0;
    dispatch_totals_batch(household.demand, household.insolation, base_states_, 1, tech, std::span(&empty, 1), energy,
                          {}, &index_);
    baseline_bills_.resize(energy.size());
    for (int n = 1; n <= horizon; ++n) {
        const auto k = static_cast<std::size_t>(n - 1);
        baseline_bills_[k] =
            annual_bill(energy[k].import_kwh, energy[k].export_kwh, base_nominal_pv_[k], n, year, params);
    }
}

void Appraisal::cash_flows_batch(std::span<const Candidate> batch, std::span<CashFlowSeries> out) const {
    const std::size_t lanes = batch.size();
    if (lanes == 0 || lanes > kDispatchLanes || out.size() < lanes)
        throw std::invalid_argument("Appraisal: batch needs 1 to kDispatchLanes candidates");
    const std::size_t horizon = base_states_.size();
    std::vector<YearState> states(horizon * lanes);
    for (std::size_t k = 0; k < horizon; ++k) {
        // the candidate is installed at the decision year, so it is k years old in horizon year k+1
        const int age = static_cast<int>(k);
        for (std::size_t l = 0; l < lanes; ++l) {
            auto& st = states[k * lanes + l];
            st = base_states_[k];
            st.pv_kw += batch[l].pv_kwp * tech_.pv_derating(age);
            st.usable_kwh += batch[l].battery_kwh * tech_.battery_derating(age) * tech_.depth_of_discharge;
        }
    }
    std::vector<AnnualEnergy> energy(horizon * lanes);
    const double empty[kDispatchLanes] = {};
    dispatch_totals_batch(household_.demand, household_.insolation, states, lanes, tech_, empty, energy, {}, &index_);

    for (std::size_t l = 0; l < lanes; ++l) {
        const Candidate& c = batch[l];
        CashFlowSeries& cf = out[l];
        cf.upfront_cost = system_cost(c.pv_kwp, c.battery_kwh, year_, params_);
        cf.annual_savings.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) {
            const int n = static_cast<int>(k) + 1;
            const double combined_pv =
                base_nominal_pv_[k] + (tech_.pv_derating(static_cast<int>(k)) > 0.0 ? c.pv_kwp : 0.0);
            const auto& e = energy[k * lanes + l];
            const double bill = annual_bill(e.import_kwh, e.export_kwh, combined_pv, n, year_, params_);
            cf.annual_savings[k] = baseline_bills_[k] - bill;
        }
    }
}

CashFlowSeries Appraisal::cash_flows(Candidate c) const {
    CashFlowSeries cf;
    cash_flows_batch(std::span(&c, 1), std::span(&cf, 1));
    return cf;
}

CandidateValue Appraisal::evaluate(Candidate c) const {
    const auto cf = cash_flows(c);
    return {npv(cf, params_), discounted_payback(cf, params_), cf.upfront_cost};
}

void Appraisal::evaluate_batch(std::span<const Candidate> batch, std::span<CandidateValue> out) const {
    CashFlowSeries cf[kDispatchLanes];
    cash_flows_batch(batch, cf);
    for (std::size_t l = 0; l < batch.size(); ++l)
        out[l] = {npv(cf[l], params_), discounted_payback(cf[l], params_), cf[l].upfront_cost};
}

CandidateValue evaluate_candidate(const HouseholdProfile& household, const AssetLedger& ledger, Candidate candidate,
                                  int year, const ScenarioParams& params, const TechnicalParams& tech) {
    if (candidate.pv_kwp == 0.0 && candidate.battery_kwh == 0.0)
        throw std::invalid_argument("evaluate_candidate: candidate must add capacity");
    return Appraisal(household, ledger, year, params, tech).evaluate(candidate);
}

std::vector<CandidateValue> evaluate_candidates(const Appraisal& appraisal, std::span<const Candidate> candidates,
                                                Execution execution) {
    std::vector<CandidateValue> values(candidates.size());
    const auto batches = static_cast<std::ptrdiff_t>((candidates.size() + kDispatchLanes - 1) / kDispatchLanes);
    auto run = [&](std::ptrdiff_t b) {
        const auto first = static_cast<std::size_t>(b) * kDispatchLanes;
        const auto count = std::min(kDispatchLanes, candidates.size() - first);
        appraisal.evaluate_batch(candidates.subspan(first, count), std::span(values).subspan(first, count));
    };
    if (execution == Execution::serial) {
        for (std::ptrdiff_t b = 0; b < batches; ++b) run(b);
        return values;
    }
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < batches; ++b) run(b);
    return values;
}

std::size_t select_best(std::span<const Candidate> candidates, std::span<const CandidateValue> values) {
    if (candidates.empty() || candidates.size() != values.size())
        throw std::invalid_argument("select_best: need one value per candidate");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& a = values[i];
        const auto& b = values[best];
        bool better = a.npv > b.npv;
        if (a.npv == b.npv) {
            if (a.cost != b.cost)
                better = a.cost < b.cost;
            else if (candidates[i].pv_kwp != candidates[best].pv_kwp)
                better = candidates[i].pv_kwp < candidates[best].pv_kwp;
            else
                better = candidates[i].battery_kwh < candidates[best].battery_kwh;
        }
        if (better) best = i;
    }
    return best;
}

std::optional<InvestmentRecord> decide_investment(const HouseholdProfile& household, AssetLedger& ledger,
                                                  CandidateGrid& grid, int year, const ScenarioParams& params,
                                                  const TechnicalParams& tech, Execution execution) {
    const auto candidates = enumerate_candidates(grid);
    const Appraisal appraisal(household, ledger, year, params, tech);
    const auto values = evaluate_candidates(appraisal, candidates, execution);

    bool gate = false;
    for (const auto& v : values)
        if (passes_payback_gate(v.dpp, params)) {
            gate = true;
            break;
        }
    if (!gate) return std::nullopt;

    const std::size_t best = select_best(candidates, values);
    const auto& choice = candidates[best];
    const auto& value = values[best];
    if (!(value.npv > 0.0)) return std::nullopt;

    if (choice.pv_kwp > 0.0) ledger.add_pv(year, choice.pv_kwp);
    if (choice.battery_kwh > 0.0) ledger.add_battery(year, choice.battery_kwh);
    if (std::abs(choice.pv_kwp - grid.largest_pv()) < kGridSlack) grid.pv_max *= 1.0 + grid.expansion_factor;
    if (std::abs(choice.battery_kwh - grid.largest_battery()) < kGridSlack)
        grid.battery_max *= 1.0 + grid.expansion_factor;
    return InvestmentRecord{year, choice.pv_kwp, choice.battery_kwh, value.npv, value.dpp, value.cost};
}

HouseholdOutcome simulate_household(const HouseholdProfile& household, const ScenarioParams& params,
                                    const TechnicalParams& tech, CandidateGrid grid, Execution execution) {
    params.validate();
    tech.validate();
    grid.validate();
    HouseholdOutcome out;
    out.household_id = household.household_id;
    double soc = 0.0;
    for (int t = 1; t <= params.sim_years; ++t) {
        out.ledger.retire(t, tech);
        if (auto record = decide_investment(household, out.ledger, grid, t, params, tech, execution)) {
            if (record->pv_added > 0.0) out.history.add_pv(t, record->pv_added);
            if (record->battery_added > 0.0) out.history.add_battery(t, record->battery_added);
            out.investments.push_back(*record);
        }
        RealisedYear year;
        year.year = t;
        year.state = {out.ledger.effective_pv(t, tech), usable_battery_capacity(out.ledger, t, tech)};
        year.nominal_pv = out.ledger.nominal_pv(t, tech);
        year.nominal_battery = out.ledger.nominal_battery(t, tech);
        year.soc_start = soc;
        AnnualEnergy energy;
        soc = dispatch_totals(household.demand, household.insolation, std::span(&year.state, 1), tech, soc,
                              std::span(&energy, 1));
        year.energy = energy;
        out.years.push_back(year);
    }
    return out;
}

DispatchResult realised_dispatch(const HouseholdProfile& household, const HouseholdOutcome& outcome,
                                 std::size_t year_index, const TechnicalParams& tech) {
    const auto& y = outcome.years.at(year_index);
    return simulate_dispatch(household, std::span(&y.state, 1), tech, y.year, y.soc_start);
}

std::vector<HouseholdOutcome> simulate_households(const FleetDataset& dataset, const ScenarioParams& params,
                                                  const TechnicalParams& tech, const CandidateGrid& grid,
                                                  int workers) {
    const auto n = static_cast<std::ptrdiff_t>(dataset.households.size());
    std::vector<HouseholdOutcome> out(dataset.households.size());
#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
#endif
    // exceptions must not escape the parallel region
    std::vector<std::string> errors(out.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = simulate_household(dataset.households[i], params, tech, grid, Execution::serial);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("household " + dataset.households[i].household_id + ": " + errors[i]);
    return out;
}

void write_investment_log(std::ostream& out, const std::vector<HouseholdOutcome>& outcomes,
                          const ScenarioParams& params, bool header) {
    using detail::format_double;
    if (header)
        out << "household_id,year,calendar_year,pv_added_kwp,battery_added_kwh,npv,dpp_years,cost,"
               "cumulative_pv_kwp,cumulative_battery_kwh\n";
    for (const auto& o : outcomes) {
        for (const auto& r : o.investments) {
            const auto& realised = o.years.at(static_cast<std::size_t>(r.year - 1));
            out << o.household_id << ',' << r.year << ',' << params.sim_start + r.year - 1 << ','
                << format_double(r.pv_added) << ',' << format_double(r.battery_added) << ',' << format_double(r.npv)
                << ',' << (r.dpp ? std::to_string(*r.dpp) : std::string("never")) << ',' << format_double(r.cost)
                << ',' << format_double(realised.nominal_pv) << ',' << format_double(realised.nominal_battery)
                << '\n';
        }
    }
}

}  // namespace prosim
