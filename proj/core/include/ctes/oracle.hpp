#pragma once

#include <string>
#include <vector>

#include "ctes/env.hpp"
#include "ctes/plant.hpp"
#include "ctes/policies.hpp"
#include "ctes/trace.hpp"

namespace ctes {

// Exact finite-horizon value function on a discretized SoC grid.
// values(k, j) is the minimal cost-to-go at hour k (1..T+1) from grid node j;
// best_plr(k, j) records the minimizing action for k <= T (ties take the
// smallest PLR).
class ValueTable {
 public:
  ValueTable(int horizon, int num_nodes, double e_max);

  double value(int k, int node) const { return values_[index(k, node)]; }
  double& value(int k, int node) { return values_[index(k, node)]; }
  double best_action(int k, int node) const;
  double& best_action_ref(int k, int node);

  int horizon() const { return horizon_; }
  int num_nodes() const { return num_nodes_; }
  double e_max() const { return e_max_; }

  double spacing() const {
    return num_nodes_ > 1 ? e_max_ / (num_nodes_ - 1) : 0.0;
  }
  double node_soc(int node) const {
    return num_nodes_ > 1 ? node * spacing() : 0.0;
  }
  // Nearest grid node; exact midpoints round down.
  int nearest_node(double soc) const;

 private:
  std::size_t index(int k, int node) const;
  int horizon_;
  int num_nodes_;
  double e_max_;
  std::vector<double> values_;    // (horizon+1) x num_nodes
  std::vector<double> best_plr_;  // horizon x num_nodes
};

struct DpConfig {
  int soc_nodes = 11;
  std::vector<double> action_grid;  // empty selects the 11-point default
  double penalty_lambda = -1.0;     // <0 derives the default
  int max_horizon = 168;            // hard guard on trace length

  std::vector<double> resolved_grid() const;
};

// Backward induction over the deterministic trace. Infeasible states execute
// the forced PLR=1 and are charged stage cost plus lambda times the unmet
// load; per-step SoC transitions round to the nearest grid node.
// Throws SizeError when the trace exceeds max_horizon.
ValueTable dp_solve(const Trace& trace, const PlantSpec& plant,
                    const DpConfig& config);

// Marginal value of storage at hour k: value(k, node-1) - value(k, node).
// Throws DomainError for node 0.
double marginal_value(const ValueTable& table, int k, int node);

// Plays the argmin-table action at (k, nearest node), clamped into the
// current feasibility bounds so continuous-SoC rollouts stay mask-safe.
// Off-trace states (k outside 1..T) raise DomainError.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(const ValueTable& table) : table_(&table) {}
  double act(const SimState& state, const FeasibleBounds& bounds) override;
  std::string_view name() const override { return "oracle"; }

 private:
  const ValueTable* table_;
};

// Rolls a policy through the discretized MDP the DP solves: states are grid
// nodes, actions snap to the nearest executable grid candidate, infeasible
// hours are forced to PLR=1, and the accumulated cost includes the
// loss-of-load penalty. The oracle policy reproduces value(1, node(e_init)).
double grid_rollout_cost(Policy& policy, const Trace& trace,
                         const PlantSpec& plant, const DpConfig& config,
                         double e_init);

// k,node,soc,value,argmin_plr for k = 1..T.
void write_value_table_csv(const ValueTable& table, const std::string& path);

}  // namespace ctes
