#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prosim/dispatch.hpp"
#include "prosim/finance.hpp"
#include "prosim/profiles.hpp"

namespace prosim {

/// Search bounds and granularity for incremental PV/battery additions.
/// The bounds grow by `expansion_factor` each time a household picks the
/// largest size on that axis.
struct CandidateGrid {
    double pv_max = 10.0;       // kW_P
    double battery_max = 20.0;  // kWh
    double pv_step = 0.5;
    double battery_step = 0.5;
    double expansion_factor = 0.40;

    void validate() const;
    std::size_t pv_points() const;       // including zero
    std::size_t battery_points() const;  // including zero
    double largest_pv() const;           // largest grid value <= pv_max
    double largest_battery() const;
};

struct Candidate {
    double pv_kwp = 0.0;
    double battery_kwh = 0.0;
    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Every grid point except (0, 0), ascending by PV then battery.
std::vector<Candidate> enumerate_candidates(const CandidateGrid& grid);

struct CandidateValue {
    double npv = 0.0;
    std::optional<int> dpp;
    double cost = 0.0;
};

struct InvestmentRecord {
    int year = 0;  // simulation year
    double pv_added = 0.0;
    double battery_added = 0.0;
    double npv = 0.0;
    std::optional<int> dpp;
    double cost = 0.0;
};

enum class Execution { serial, parallel };

/// Appraisal context for one household in one decision year. The baseline
/// (existing assets only) is dispatched once and shared by every candidate.
class Appraisal {
public:
    Appraisal(const HouseholdProfile& household, const AssetLedger& ledger, int year, const ScenarioParams& params,
              const TechnicalParams& tech);
    Appraisal(HouseholdProfile&&, const AssetLedger&, int, const ScenarioParams&, const TechnicalParams&) = delete;

    CashFlowSeries cash_flows(Candidate candidate) const;
    CandidateValue evaluate(Candidate candidate) const;
    /// Up to kDispatchLanes candidates dispatched together; same values as evaluate().
    void evaluate_batch(std::span<const Candidate> batch, std::span<CandidateValue> out) const;

    int year() const { return year_; }
    std::span<const double> baseline_bills() const { return baseline_bills_; }

private:
    void cash_flows_batch(std::span<const Candidate> batch, std::span<CashFlowSeries> out) const;

    const HouseholdProfile& household_;
    ScenarioParams params_;
    TechnicalParams tech_;
    int year_;
    std::vector<YearState> base_states_;
    std::vector<double> base_nominal_pv_;
    std::vector<double> baseline_bills_;
    DispatchIndex index_;
};

CandidateValue evaluate_candidate(const HouseholdProfile& household, const AssetLedger& ledger, Candidate candidate,
                                  int year, const ScenarioParams& params, const TechnicalParams& tech);

/// Values for every candidate, in candidate order. The parallel path splits
/// candidates across OpenMP threads; the serial path is the reference.
std::vector<CandidateValue> evaluate_candidates(const Appraisal& appraisal, std::span<const Candidate> candidates,
                                                Execution execution = Execution::serial);

/// Index of the best candidate: highest NPV, then lowest cost, then lowest
/// PV, then lowest battery. Candidates must be non-empty.
std::size_t select_best(std::span<const Candidate> candidates, std::span<const CandidateValue> values);

/// One yearly decision. Installs the best candidate into `ledger` (and grows
/// `grid` on bound hits) when some candidate pays back within the threshold
/// and the best NPV is positive.
std::optional<InvestmentRecord> decide_investment(const HouseholdProfile& household, AssetLedger& ledger,
                                                  CandidateGrid& grid, int year, const ScenarioParams& params,
                                                  const TechnicalParams& tech,
                                                  Execution execution = Execution::serial);

/// Realised operation of the household in one simulation year.
struct RealisedYear {
    int year = 0;
    YearState state;
    double nominal_pv = 0.0;
    double nominal_battery = 0.0;
    double soc_start = 0.0;
    AnnualEnergy energy;
};

struct HouseholdOutcome {
    std::string household_id;
    AssetLedger ledger;    // in service after the final year
    AssetLedger history;   // every vintage ever installed
    std::vector<InvestmentRecord> investments;
    std::vector<RealisedYear> years;
};

/// Sequential yearly loop: retire, decide, then operate the year.
HouseholdOutcome simulate_household(const HouseholdProfile& household, const ScenarioParams& params,
                                    const TechnicalParams& tech, CandidateGrid grid,
                                    Execution execution = Execution::serial);

/// Interval-level dispatch for a realised year (0-based index into outcome.years).
DispatchResult realised_dispatch(const HouseholdProfile& household, const HouseholdOutcome& outcome,
                                 std::size_t year_index, const TechnicalParams& tech);

/// All households, fanned out over `workers` OpenMP threads (0 = runtime
/// default). Output order follows the dataset regardless of scheduling.
std::vector<HouseholdOutcome> simulate_households(const FleetDataset& dataset, const ScenarioParams& params,
                                                  const TechnicalParams& tech, const CandidateGrid& grid,
                                                  int workers = 1);

/// Investment log rows: household_id,year,calendar_year,pv_added_kwp,...
void write_investment_log(std::ostream& out, const std::vector<HouseholdOutcome>& outcomes,
                          const ScenarioParams& params, bool header = true);

}  // namespace prosim
