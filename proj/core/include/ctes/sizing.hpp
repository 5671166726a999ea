#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctes/dqn.hpp"
#include "ctes/plant.hpp"
#include "ctes/trace.hpp"

namespace ctes {

// Year-one maintenance is a fixed fraction of total CAPEX and inflates
// annually; the discounted sum runs over the full horizon.
enum class DiscountConvention {
  kEndOfYear,    // year i cash flow divided by (1+r)^i
  kStartOfYear,  // divided by (1+r)^(i-1)
};

struct EconomicParams {
  double chiller_capex_rate = 6410.0;  // currency per kWh_th
  double tes_capex_rate = 1500.0;      // currency per kWh_th
  double maintenance_fraction = 0.02;
  double maintenance_inflation = 0.05;
  double discount_rate = 0.06;
  int horizon_years = 30;
  DiscountConvention discount_convention = DiscountConvention::kEndOfYear;

  void validate() const;  // throws ParameterError
};

struct CandidateSizing {
  double chiller_capacity = 700.0;  // C_ch
  double tes_capacity = 1500.0;     // E_max
};

struct Capex {
  double chiller = 0.0;
  double tes = 0.0;
  double total = 0.0;
};

struct SizingResult {
  CandidateSizing theta;
  double capex_chiller = 0.0;
  double capex_tes = 0.0;
  double f_elec = 0.0;
  double opex = 0.0;
  double lcc = 0.0;
  double total_lol = 0.0;
  int lol_incidents = 0;
  double tes_throughput = 0.0;
  bool feasible = false;          // total_lol == 0 and evaluation succeeded
  bool evaluation_failed = false;
  std::string failure;
};

Capex capex(const CandidateSizing& theta, const EconomicParams& econ);

// Net present value of electricity plus inflating maintenance over the
// horizon, at the configured discount convention.
double opex(double annual_elec_cost, double capex_total,
            const EconomicParams& econ);

// Full economics for one configuration given its measured annual electricity
// cost and cumulative loss-of-load.
SizingResult lcc(const CandidateSizing& theta, double f_elec, double total_lol,
                 const EconomicParams& econ);

struct SweepConfig {
  std::vector<CandidateSizing> candidates;
  std::string policy = "dqn";  // dqn | greedy | tfp | sdpp
  TrainConfig train;           // used when policy == "dqn"
  double penalty_lambda = -1.0;
  double e_init = 0.0;         // evaluation starts from empty storage
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

// Evaluates every candidate: builds the plant, obtains the policy (training
// a DQN per candidate when requested), runs one evaluation year, and computes
// the economics. Candidates whose training diverges are marked failed and the
// sweep continues. Per-candidate seeds derive from (master_seed, theta), so
// results are identical for any jobs count.
std::vector<SizingResult> sweep(const SweepConfig& config, const Trace& trace,
                                const PlantSpec& plant_template,
                                const EconomicParams& econ);

// Least-LCC feasible result; ties prefer smaller total CAPEX, then smaller
// chiller capacity. Throws InfeasibleSizingError when nothing is feasible.
const SizingResult& select_optimal(std::span<const SizingResult> results);

// c_ch,e_max,capex_ch,capex_tes,f_elec,total_lol,lol_incidents,tes_throughput,opex,lcc,feasible
void write_sweep_csv(std::span<const SizingResult> results,
                     const std::string& path);

// JSON summary naming the optimum (or recording that none is feasible).
void write_sweep_summary_json(std::span<const SizingResult> results,
                              const std::string& path);

// Rows of c_ch,e_max,f_elec[,total_lol] for offline LCC evaluation.
struct MeasuredCandidate {
  CandidateSizing theta;
  double f_elec = 0.0;
  double total_lol = 0.0;
};
std::vector<MeasuredCandidate> load_measured_candidates_csv(
    const std::string& path);

}  // namespace ctes
