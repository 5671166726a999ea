#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctes/env.hpp"
#include "ctes/mlp.hpp"
#include "ctes/plant.hpp"
#include "ctes/policies.hpp"
#include "ctes/replay.hpp"
#include "ctes/rng.hpp"
#include "ctes/trace.hpp"

namespace ctes {

// Min-max scaling constants derived from the training trace, plus the cost
// scale used to keep TD targets O(1).
struct Normalization {
  double load_min = 0.0;
  double load_max = 1.0;
  double price_min = 0.0;
  double price_max = 1.0;
  double soc_max = 1.0;
  int num_sources = 1;
  double cost_scale = 1.0;  // max hourly electricity cost over the trace

  static Normalization from(const Trace& trace, const PlantSpec& plant);

  // [load, soc, price, sin/cos hour, sin/cos day] plus availability flags
  // when more than one source exists; the action is appended separately.
  int state_dim() const { return 7 + (num_sources > 1 ? num_sources : 0); }
};

// Normalized state features, without the action component.
std::vector<double> featurize_state(const SimState& state,
                                    const Normalization& norms);

// Full network input: state features with the PLR appended.
std::vector<double> featurize(const SimState& state, double plr,
                              const Normalization& norms);

struct ActionChoice {
  int index = 0;
  double plr = 0.0;
  bool explored = false;
};

// Greedy (cost-minimizing) choice over the executable grid actions.
ActionChoice argmin_action(const Mlp& net,
                           std::span<const double> state_features,
                           const FeasibleBounds& bounds,
                           std::span<const double> grid);

// Epsilon-greedy over the executable grid actions: with probability epsilon a
// uniform feasible action, otherwise the Q-argmin. Infeasible states always
// yield the forced PLR=1.
ActionChoice select_action(const Mlp& net,
                           std::span<const double> state_features,
                           const FeasibleBounds& bounds,
                           std::span<const double> grid, double epsilon,
                           Rng& rng);

struct TrainConfig {
  int episodes = 50;
  double gamma = 0.99;
  std::vector<double> action_grid;  // empty selects the 11-point default
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  double epsilon_decay_fraction = 0.5;  // share of steps spent decaying
  bool epsilon_fixed = false;           // hold epsilon at epsilon_end
  std::size_t replay_capacity = 20000;
  int batch_size = 128;
  int update_period = 8;        // environment steps between updates
  int target_sync_period = 1000;  // steps between target-network copies
  double learning_rate = 0.01;
  std::vector<int> hidden = {32, 32};
  double penalty_lambda = -1.0;  // <0 derives the default from trace + plant
  std::uint64_t seed = 0;

  std::vector<double> resolved_grid() const;
  void validate() const;
};

struct EpisodeStat {
  int episode = 0;
  double total_cost = 0.0;  // electricity only, no penalty
  double total_lol = 0.0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
};

// Frozen greedy policy over the learned Q-network.
class TrainedPolicy final : public Policy {
 public:
  TrainedPolicy(Mlp net, Normalization norms, std::vector<double> grid)
      : net_(std::move(net)), norms_(norms), grid_(std::move(grid)) {}

  double act(const SimState& state, const FeasibleBounds& bounds) override;
  std::string_view name() const override { return "dqn"; }

  const Mlp& net() const { return net_; }
  const Normalization& norms() const { return norms_; }
  const std::vector<double>& grid() const { return grid_; }

 private:
  Mlp net_;
  Normalization norms_;
  std::vector<double> grid_;
};

struct TrainResult {
  TrainedPolicy policy;
  std::vector<EpisodeStat> curve;
  std::vector<std::string> warnings;
};

// One squared-TD-error minimization step on the policy network. Targets are
// cost/cost_scale + gamma * masked min of the target network; terminal
// transitions bootstrap nothing. Returns the batch loss (scaled units).
// Throws DivergenceError when the loss is not finite.
double td_update(Mlp& policy_net, const Mlp& target_net,
                 const ReplayBuffer& replay,
                 std::span<const std::size_t> batch_indices, double gamma,
                 std::span<const double> grid, double cost_scale,
                 AdamOptimizer& optimizer);

// Runs the full training loop: epsilon-greedy episodes over the same trace
// with a randomized initial storage level, experience replay, periodic
// updates, and periodic target synchronization.
TrainResult train(const Trace& trace, const PlantSpec& plant,
                  const TrainConfig& config);

// Weight artifact (JSON): layer sizes, row-major weights, normalization
// constants, and the action grid.
void save_policy(const TrainedPolicy& policy, const std::string& path);
TrainedPolicy load_policy(const std::string& path);

// episode,total_cost,total_lol,mean_loss,epsilon
void write_training_curve_csv(std::span<const EpisodeStat> curve,
                              const std::string& path);

}  // namespace ctes
