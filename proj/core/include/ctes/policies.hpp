#pragma once

#include <memory>
#include <string_view>

#include "ctes/env.hpp"
#include "ctes/plant.hpp"

namespace ctes {

// Operating policy: maps the current state and its feasibility bounds to a
// part-load ratio. Mask-respecting policies return a value in
// [bounds.lower, bounds.upper] and 1 on infeasible states. TFP's first rule
// may deliberately undershoot the lower bound (see TfpPolicy).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual double act(const SimState& state, const FeasibleBounds& bounds) = 0;
  virtual std::string_view name() const = 0;
};

// Minimum feasible PLR every hour: storage is spent, never built.
class GreedyPolicy final : public Policy {
 public:
  double act(const SimState&, const FeasibleBounds& bounds) override {
    return bounds.infeasible ? 1.0 : bounds.lower;
  }
  std::string_view name() const override { return "greedy"; }
};

// TES-first feasibility policy: serve demand from storage alone whenever
// E_k >= X_k, otherwise run the chiller at the upper bound to rebuild
// storage. The storage-only rule ignores the discharge efficiency, so when
// eta*E_k < X_k <= E_k it under-produces and the simulator records the
// shortfall as loss-of-load.
class TfpPolicy final : public Policy {
 public:
  double act(const SimState& state, const FeasibleBounds& bounds) override {
    if (bounds.infeasible) return 1.0;
    return state.soc >= state.load ? 0.0 : bounds.upper;
  }
  std::string_view name() const override { return "tfp"; }
};

// Storage-dominant pessimistic policy: always the upper bound, maximizing
// next-hour storage regardless of price.
class SdppPolicy final : public Policy {
 public:
  double act(const SimState&, const FeasibleBounds& bounds) override {
    return bounds.infeasible ? 1.0 : bounds.upper;
  }
  std::string_view name() const override { return "sdpp"; }
};

// greedy | tfp | sdpp. Throws ParameterError for unknown names.
std::unique_ptr<Policy> make_baseline_policy(std::string_view name);

}  // namespace ctes
