#include "ctes/dqn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ctes/errors.hpp"

namespace ctes {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double scale01(double v, double lo, double hi) {
  return hi > lo ? (v - lo) / (hi - lo) : 0.0;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

Normalization Normalization::from(const Trace& trace, const PlantSpec& plant) {
  if (trace.empty()) throw DataError("cannot derive normalization from an empty trace");
  Normalization n;
  n.load_min = trace.records.front().load_kwh_th;
  n.load_max = n.load_min;
  n.price_min = min_available_price(trace.records.front());
  n.price_max = n.price_min;
  n.soc_max = plant.tes.capacity_kwh_th;
  n.num_sources = trace.num_sources();
  double max_cost = 0.0;
  for (const HourlyRecord& rec : trace.records) {
    n.load_min = std::min(n.load_min, rec.load_kwh_th);
    n.load_max = std::max(n.load_max, rec.load_kwh_th);
    const double p = min_available_price(rec);
    n.price_min = std::min(n.price_min, p);
    n.price_max = std::max(n.price_max, p);
    max_cost = std::max(
        max_cost, p * elec_power_kw(plant.chiller, 1.0, rec.t_chw, rec.t_cond));
  }
  n.cost_scale = max_cost > 0.0 ? max_cost : 1.0;
  return n;
}

std::vector<double> featurize_state(const SimState& state,
                                    const Normalization& norms) {
  std::vector<double> f;
  f.reserve(norms.state_dim());
  f.push_back(scale01(state.load, norms.load_min, norms.load_max));
  f.push_back(norms.soc_max > 0.0 ? state.soc / norms.soc_max : 0.0);
  f.push_back(scale01(state.price, norms.price_min, norms.price_max));
  f.push_back(std::sin(kTwoPi * state.hour / 24.0));
  f.push_back(std::cos(kTwoPi * state.hour / 24.0));
  f.push_back(std::sin(kTwoPi * state.day / 365.0));
  f.push_back(std::cos(kTwoPi * state.day / 365.0));
  if (norms.num_sources > 1) {
    for (std::uint8_t a : state.availability) f.push_back(a ? 1.0 : 0.0);
  }
  return f;
}

std::vector<double> featurize(const SimState& state, double plr,
                              const Normalization& norms) {
  std::vector<double> f = featurize_state(state, norms);
  f.push_back(plr);
  return f;
}

ActionChoice argmin_action(const Mlp& net,
                           std::span<const double> state_features,
                           const FeasibleBounds& bounds,
                           std::span<const double> grid) {
  const std::vector<GridAction> actions = masked_grid_actions(grid, bounds);
  std::vector<double> input(state_features.begin(), state_features.end());
  input.push_back(0.0);
  ActionChoice best{actions.front().index, actions.front().plr, false};
  double best_q = std::numeric_limits<double>::infinity();
  for (const GridAction& a : actions) {
    input.back() = a.plr;
    const double q = net.forward(input);
    if (q < best_q) {
      best_q = q;
      best = {a.index, a.plr, false};
    }
  }
  return best;
}

ActionChoice select_action(const Mlp& net,
                           std::span<const double> state_features,
                           const FeasibleBounds& bounds,
                           std::span<const double> grid, double epsilon,
                           Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    const std::vector<GridAction> actions = masked_grid_actions(grid, bounds);
    const GridAction& a = actions[rng.below(actions.size())];
    return {a.index, a.plr, true};
  }
  return argmin_action(net, state_features, bounds, grid);
}

std::vector<double> TrainConfig::resolved_grid() const {
  if (!action_grid.empty()) return action_grid;
  std::vector<double> grid(11);
  for (int i = 0; i <= 10; ++i) grid[i] = i / 10.0;
  return grid;
}

void TrainConfig::validate() const {
  if (episodes < 0) throw ParameterError("episodes must be nonnegative");
  if (!(gamma > 0.0) || gamma >= 1.0) {
    throw ParameterError("gamma must lie in (0,1)");
  }
  if (batch_size <= 0 || static_cast<std::size_t>(batch_size) > replay_capacity) {
    throw ParameterError("batch size must be positive and at most the replay capacity");
  }
  if (update_period <= 0 || target_sync_period <= 0) {
    throw ParameterError("update and target-sync periods must be positive");
  }
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(epsilon_start >= 0.0) || epsilon_start > 1.0 || !(epsilon_end >= 0.0) ||
      epsilon_end > 1.0) {
    throw ParameterError("epsilon bounds must lie in [0,1]");
  }
  if (!(epsilon_decay_fraction > 0.0) || epsilon_decay_fraction > 1.0) {
    throw ParameterError("epsilon_decay_fraction must lie in (0,1]");
  }
  if (hidden.empty()) throw ParameterError("network needs at least one hidden layer");
  const std::vector<double> grid = resolved_grid();
  if (grid.empty()) throw ParameterError("action grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0) {
      throw ParameterError("action grid values must lie in [0,1]");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw ParameterError("action grid must be strictly ascending");
    }
  }
}

double TrainedPolicy::act(const SimState& state, const FeasibleBounds& bounds) {
  const std::vector<double> features = featurize_state(state, norms_);
  return argmin_action(net_, features, bounds, grid_).plr;
}

double td_update(Mlp& policy_net, const Mlp& target_net,
                 const ReplayBuffer& replay,
                 std::span<const std::size_t> batch_indices, double gamma,
                 std::span<const double> grid, double cost_scale,
                 AdamOptimizer& optimizer) {
  if (batch_indices.empty()) throw ParameterError("empty batch");
  const double n = static_cast<double>(batch_indices.size());
  const double scale = cost_scale > 0.0 ? cost_scale : 1.0;

  std::vector<double> grad(policy_net.num_params(), 0.0);
  std::vector<double> input;
  double loss = 0.0;

  for (const std::size_t idx : batch_indices) {
    const Transition& t = replay[idx];
    double target = t.cost / scale;
    if (!t.terminal) {
      FeasibleBounds b;
      b.lower = t.next_lower;
      b.upper = t.next_upper;
      b.infeasible = t.next_infeasible;
      const std::vector<GridAction> actions = masked_grid_actions(grid, b);
      input.assign(t.next_state.begin(), t.next_state.end());
      input.push_back(0.0);
      double best = std::numeric_limits<double>::infinity();
      for (const GridAction& a : actions) {
        input.back() = a.plr;
        best = std::min(best, target_net.forward(input));
      }
      target += gamma * best;
    }
    input.assign(t.state.begin(), t.state.end());
    input.push_back(t.executed_plr);
    const double q = policy_net.forward(input);
    const double err = q - target;
    loss += err * err;
    policy_net.forward_backward(input, 2.0 * err / n, grad);
  }
  loss /= n;
  if (!std::isfinite(loss)) {
    throw DivergenceError("TD loss is not finite (loss=" +
                          std::to_string(loss) + ", step " +
                          std::to_string(optimizer.iterations() + 1) + ")");
  }
  optimizer.step(policy_net.params(), grad);
  return loss;
}

TrainResult train(const Trace& trace, const PlantSpec& plant,
                  const TrainConfig& config) {
  config.validate();
  plant.validate();
  const std::vector<double> grid = config.resolved_grid();
  const Normalization norms = Normalization::from(trace, plant);

  double max_price = 0.0;
  for (const HourlyRecord& rec : trace.records) {
    max_price = std::max(max_price, min_available_price(rec));
  }
  const double lambda =
      config.penalty_lambda >= 0.0
          ? config.penalty_lambda
          : default_loss_penalty(max_price, plant.chiller.capacity_kwh_th);

  Rng rng(config.seed);
  Mlp policy_net = Mlp::glorot_init(norms.state_dim() + 1, config.hidden, rng);
  Mlp target_net = policy_net;
  AdamOptimizer optimizer(policy_net.num_params(), config.learning_rate);
  ReplayBuffer replay(config.replay_capacity);

  TrainResult result{TrainedPolicy(policy_net, norms, grid), {}, {}};
  if (config.episodes == 0) {
    result.warnings.push_back(
        "episodes=0: returning the randomly initialized policy");
    return result;
  }

  Environment env(trace, plant);
  const int horizon = static_cast<int>(trace.size());
  const long total_steps = static_cast<long>(config.episodes) * horizon;
  const long decay_steps = std::max<long>(
      1, static_cast<long>(config.epsilon_decay_fraction * total_steps));

  auto epsilon_at = [&](long step) {
    if (config.epsilon_fixed) return config.epsilon_end;
    if (step >= decay_steps) return config.epsilon_end;
    const double frac = static_cast<double>(step) / decay_steps;
    return config.epsilon_start +
           frac * (config.epsilon_end - config.epsilon_start);
  };

  std::vector<std::size_t> batch;
  long global_step = 0;
  double epsilon = epsilon_at(0);

  for (int episode = 1; episode <= config.episodes; ++episode) {
    const double e_init = rng.uniform(0.0, plant.tes.capacity_kwh_th);
    SimState state = env.reset(e_init);
    double ep_cost = 0.0;
    double ep_lol = 0.0;
    double loss_sum = 0.0;
    long loss_count = 0;

    for (int k = 1; k <= horizon; ++k) {
      const FeasibleBounds bounds = env.bounds(state);
      epsilon = epsilon_at(global_step);
      std::vector<double> features = featurize_state(state, norms);
      for (double f : features) {
        if (!std::isfinite(f)) throw DataError("non-finite state feature");
      }
      const ActionChoice choice =
          select_action(policy_net, features, bounds, grid, epsilon, rng);

      const StepOutcome out = env.step(state, choice.plr);
      ep_cost += out.cost;
      ep_lol += out.loss_of_load;

      Transition t;
      t.state = std::move(features);
      t.action_index = choice.index;
      t.executed_plr = choice.plr;
      t.cost = out.cost + lambda * out.loss_of_load;
      t.terminal = k == horizon;
      if (!t.terminal) {
        t.next_state = featurize_state(state, norms);
        const FeasibleBounds nb = env.bounds(state);
        t.next_lower = nb.lower;
        t.next_upper = nb.upper;
        t.next_infeasible = nb.infeasible;
      } else {
        t.next_state.assign(norms.state_dim(), 0.0);
      }
      replay.push(std::move(t));

      ++global_step;
      if (global_step % config.update_period == 0 &&
          replay.size() >= static_cast<std::size_t>(config.batch_size)) {
        replay.sample_indices(config.batch_size, rng, batch);
        loss_sum += td_update(policy_net, target_net, replay, batch,
                              config.gamma, grid, norms.cost_scale, optimizer);
        ++loss_count;
      }
      if (global_step % config.target_sync_period == 0) {
        target_net = policy_net;
      }
    }

    result.curve.push_back({episode, ep_cost, ep_lol,
                            loss_count > 0 ? loss_sum / loss_count : 0.0,
                            epsilon});
  }

  result.policy = TrainedPolicy(std::move(policy_net), norms, grid);
  return result;
}

void save_policy(const TrainedPolicy& policy, const std::string& path) {
  nlohmann::json j;
  j["layer_sizes"] = policy.net().layer_sizes();
  j["params"] = policy.net().params();
  const Normalization& n = policy.norms();
  j["normalization"] = {
      {"load_min", n.load_min},   {"load_max", n.load_max},
      {"price_min", n.price_min}, {"price_max", n.price_max},
      {"soc_max", n.soc_max},     {"num_sources", n.num_sources},
      {"cost_scale", n.cost_scale}};
  j["action_grid"] = policy.grid();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write policy artifact '" + path + "'");
  out << j.dump(2) << '\n';
}

TrainedPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open policy artifact '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("policy artifact '" + path + "' is not valid JSON: " +
                    e.what());
  }
  try {
    Mlp net(j.at("layer_sizes").get<std::vector<int>>());
    const std::vector<double> params =
        j.at("params").get<std::vector<double>>();
    if (static_cast<int>(params.size()) != net.num_params()) {
      throw DataError("policy artifact '" + path +
                      "' has a parameter count mismatch");
    }
    net.params() = params;
    const nlohmann::json& jn = j.at("normalization");
    Normalization n;
    n.load_min = jn.at("load_min").get<double>();
    n.load_max = jn.at("load_max").get<double>();
    n.price_min = jn.at("price_min").get<double>();
    n.price_max = jn.at("price_max").get<double>();
    n.soc_max = jn.at("soc_max").get<double>();
    n.num_sources = jn.at("num_sources").get<int>();
    n.cost_scale = jn.at("cost_scale").get<double>();
    std::vector<double> grid = j.at("action_grid").get<std::vector<double>>();
    return TrainedPolicy(std::move(net), n, std::move(grid));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("policy artifact '" + path + "' is malformed: " + e.what());
  }
}

void write_training_curve_csv(std::span<const EpisodeStat> curve,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write training curve '" + path + "'");
  std::string text = "episode,total_cost,total_lol,mean_loss,epsilon\n";
  for (const EpisodeStat& s : curve) {
    text += std::to_string(s.episode);
    for (double v : {s.total_cost, s.total_lol, s.mean_loss, s.epsilon}) {
      text += ',';
      append_double(text, v);
    }
    text += '\n';
  }
  out << text;
}

}  // namespace ctes
