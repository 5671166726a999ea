#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctes/plant.hpp"
#include "ctes/trace.hpp"

namespace ctes {

class Policy;

// MDP state at hour k (1-based step index into the trace).
struct SimState {
  double load = 0.0;    // X_k
  double soc = 0.0;     // E_k
  double price = 0.0;   // P_k, least available-source price
  int hour = 0;         // h_k
  int day = 1;          // d_k
  std::vector<std::uint8_t> availability;  // A_k
  int k = 1;
};

struct StepOutcome {
  double cost = 0.0;          // P_k * elec_power; never includes the penalty
  double loss_of_load = 0.0;  // l_k
  double power_kw = 0.0;
  double executed_plr = 0.0;
  double tes_to_load = 0.0;   // cooling delivered from storage this hour
};

struct StepLogRow {
  int k = 0;
  int day = 1;
  int hour = 0;
  double load = 0.0;
  double price = 0.0;
  double plr = 0.0;
  double soc = 0.0;  // state of charge entering the hour
  double power_kw = 0.0;
  double cost = 0.0;
  double lol = 0.0;
};

struct EpisodeReport {
  double f_elec = 0.0;
  double total_lol = 0.0;
  int lol_incidents = 0;
  double tes_throughput = 0.0;
  std::vector<StepLogRow> log;  // filled only when requested
};

// Hour-by-hour simulator over a fixed trace and plant.
class Environment {
 public:
  Environment(const Trace& trace, PlantSpec plant);

  // State at k=1 with the given initial storage level.
  SimState reset(double e_init) const;

  FeasibleBounds bounds(const SimState& state) const;

  // Executes one hour and advances the state to record k+1.
  //
  // Admissible actions: any plr in [0, upper]; on infeasible states the
  // chiller runs at full capacity and plr must be 1. Actions above the upper
  // bound would overfill storage and raise MaskingViolationError. Actions
  // below the lower bound under-produce; the shortfall that a full TES
  // discharge cannot cover is recorded as loss-of-load.
  StepOutcome step(SimState& state, double plr) const;

  bool done(const SimState& state) const {
    return state.k > static_cast<int>(trace_->size());
  }

  const Trace& trace() const { return *trace_; }
  const PlantSpec& plant() const { return plant_; }

 private:
  const Trace* trace_;
  PlantSpec plant_;
};

// Rolls a policy over the whole trace from the given initial storage level.
EpisodeReport run_episode(Policy& policy, const Trace& trace,
                          const PlantSpec& plant, double e_init,
                          bool record_log = false);

// Writes the optional per-step log: k,day,hour,load,price,plr,soc,power_kw,cost,lol
void write_step_log_csv(const EpisodeReport& report, const std::string& path);

}  // namespace ctes
