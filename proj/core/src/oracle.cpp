#include "ctes/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "ctes/errors.hpp"

namespace ctes {
namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

double derive_lambda(const Trace& trace, const PlantSpec& plant,
                     const DpConfig& config) {
  if (config.penalty_lambda >= 0.0) return config.penalty_lambda;
  double max_price = 0.0;
  for (const HourlyRecord& rec : trace.records) {
    max_price = std::max(max_price, min_available_price(rec));
  }
  return default_loss_penalty(max_price, plant.chiller.capacity_kwh_th);
}

}  // namespace

ValueTable::ValueTable(int horizon, int num_nodes, double e_max)
    : horizon_(horizon), num_nodes_(num_nodes), e_max_(e_max) {
  if (horizon < 1) throw ParameterError("DP horizon must be positive");
  if (num_nodes < 1) throw ParameterError("DP needs at least one SoC node");
  values_.assign(static_cast<std::size_t>(horizon + 1) * num_nodes, 0.0);
  best_plr_.assign(static_cast<std::size_t>(horizon) * num_nodes, 0.0);
}

std::size_t ValueTable::index(int k, int node) const {
  if (k < 1 || k > horizon_ + 1 || node < 0 || node >= num_nodes_) {
    throw DomainError("value-table index (k=" + std::to_string(k) +
                      ", node=" + std::to_string(node) + ") out of range");
  }
  return static_cast<std::size_t>(k - 1) * num_nodes_ + node;
}

double ValueTable::best_action(int k, int node) const {
  if (k < 1 || k > horizon_ || node < 0 || node >= num_nodes_) {
    throw DomainError("argmin-table index out of range");
  }
  return best_plr_[static_cast<std::size_t>(k - 1) * num_nodes_ + node];
}

double& ValueTable::best_action_ref(int k, int node) {
  if (k < 1 || k > horizon_ || node < 0 || node >= num_nodes_) {
    throw DomainError("argmin-table index out of range");
  }
  return best_plr_[static_cast<std::size_t>(k - 1) * num_nodes_ + node];
}

int ValueTable::nearest_node(double soc) const {
  if (num_nodes_ == 1) return 0;
  const double x = soc / spacing();
  // Nearest with exact midpoints rounding down.
  const int node = static_cast<int>(std::ceil(x - 0.5));
  return std::clamp(node, 0, num_nodes_ - 1);
}

std::vector<double> DpConfig::resolved_grid() const {
  if (!action_grid.empty()) return action_grid;
  std::vector<double> grid(11);
  for (int i = 0; i <= 10; ++i) grid[i] = i / 10.0;
  return grid;
}

ValueTable dp_solve(const Trace& trace, const PlantSpec& plant,
                    const DpConfig& config) {
  plant.validate();
  const int horizon = static_cast<int>(trace.size());
  if (horizon == 0) throw DataError("trace is empty");
  if (horizon > config.max_horizon) {
    throw SizeError("trace has " + std::to_string(horizon) +
                    " hours; the DP guard allows at most " +
                    std::to_string(config.max_horizon));
  }
  const double e_max = plant.tes.capacity_kwh_th;
  if (e_max > 0.0 && config.soc_nodes < 2) {
    throw ParameterError("soc_nodes must be >= 2 when the TES has capacity");
  }
  const int nodes = e_max > 0.0 ? config.soc_nodes : 1;
  const std::vector<double> grid = config.resolved_grid();
  const double lambda = derive_lambda(trace, plant, config);

  ValueTable table(horizon, nodes, e_max);

  for (int k = horizon; k >= 1; --k) {
    const HourlyRecord& rec = trace.records[k - 1];
    const double price = min_available_price(rec);
    for (int j = 0; j < nodes; ++j) {
      const double soc = table.node_soc(j);
      const FeasibleBounds bounds =
          feasible_bounds(plant.chiller, plant.tes, rec.load_kwh_th, soc);
      const std::vector<GridAction> actions = masked_grid_actions(grid, bounds);
      double best_value = std::numeric_limits<double>::infinity();
      double best_plr = actions.front().plr;
      for (const GridAction& a : actions) {
        const double output = a.plr * plant.chiller.capacity_kwh_th;
        const TesTransition t =
            step_tes(plant.tes, output, rec.load_kwh_th, soc);
        const double power =
            elec_power_kw(plant.chiller, a.plr, rec.t_chw, rec.t_cond);
        const double cost = stage_cost(price, power, t.loss_of_load, lambda);
        const double v =
            cost + table.value(k + 1, table.nearest_node(t.soc_next));
        if (v < best_value) {
          best_value = v;
          best_plr = a.plr;
        }
      }
      table.value(k, j) = best_value;
      table.best_action_ref(k, j) = best_plr;
    }
  }
  return table;
}

double marginal_value(const ValueTable& table, int k, int node) {
  if (node < 1) {
    throw DomainError("marginal value needs a node with a lower neighbor");
  }
  return table.value(k, node - 1) - table.value(k, node);
}

double OraclePolicy::act(const SimState& state, const FeasibleBounds& bounds) {
  if (bounds.infeasible) return 1.0;
  if (state.k < 1 || state.k > table_->horizon()) {
    throw DomainError("oracle policy queried off-trace at k=" +
                      std::to_string(state.k));
  }
  // At off-node storage levels the node's action can stick out of the live
  // bounds by up to one node's worth of rounding; clamping keeps continuous
  // rollouts mask-safe and is the identity on grid states.
  const double a = table_->best_action(state.k, table_->nearest_node(state.soc));
  return std::clamp(a, bounds.lower, bounds.upper);
}

double grid_rollout_cost(Policy& policy, const Trace& trace,
                         const PlantSpec& plant, const DpConfig& config,
                         double e_init) {
  plant.validate();
  const int horizon = static_cast<int>(trace.size());
  if (horizon > config.max_horizon) {
    throw SizeError("trace exceeds the DP horizon guard");
  }
  const double e_max = plant.tes.capacity_kwh_th;
  const int nodes = e_max > 0.0 ? config.soc_nodes : 1;
  const std::vector<double> grid = config.resolved_grid();
  const double lambda = derive_lambda(trace, plant, config);

  ValueTable geometry(horizon, nodes, e_max);  // reuse the node arithmetic
  int node = geometry.nearest_node(e_init);
  double total = 0.0;

  for (int k = 1; k <= horizon; ++k) {
    const HourlyRecord& rec = trace.records[k - 1];
    SimState state;
    state.k = k;
    state.load = rec.load_kwh_th;
    state.soc = geometry.node_soc(node);
    state.price = min_available_price(rec);
    state.hour = rec.hour;
    state.day = rec.day;
    state.availability = rec.availability;

    const FeasibleBounds bounds =
        feasible_bounds(plant.chiller, plant.tes, state.load, state.soc);
    const std::vector<GridAction> actions = masked_grid_actions(grid, bounds);

    double plr;
    if (bounds.infeasible) {
      plr = 1.0;
    } else {
      const double desired = policy.act(state, bounds);
      // Snap to the nearest executable candidate; ties take the smaller PLR.
      plr = actions.front().plr;
      double best_dist = std::abs(actions.front().plr - desired);
      for (const GridAction& a : actions) {
        const double d = std::abs(a.plr - desired);
        if (d < best_dist) {
          best_dist = d;
          plr = a.plr;
        }
      }
    }
    const double output = plr * plant.chiller.capacity_kwh_th;
    const TesTransition t = step_tes(plant.tes, output, state.load, state.soc);
    const double power = elec_power_kw(plant.chiller, plr, rec.t_chw, rec.t_cond);
    total += stage_cost(state.price, power, t.loss_of_load, lambda);
    node = geometry.nearest_node(t.soc_next);
  }
  return total;
}

void write_value_table_csv(const ValueTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write value table '" + path + "'");
  std::string text = "k,node,soc,value,argmin_plr\n";
  for (int k = 1; k <= table.horizon(); ++k) {
    for (int j = 0; j < table.num_nodes(); ++j) {
      text += std::to_string(k);
      text += ',';
      text += std::to_string(j);
      text += ',';
      append_double(text, table.node_soc(j));
      text += ',';
      append_double(text, table.value(k, j));
      text += ',';
      append_double(text, table.best_action(k, j));
      text += '\n';
    }
  }
  out << text;
}

}  // namespace ctes
