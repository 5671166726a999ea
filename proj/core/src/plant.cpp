#include "ctes/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctes/errors.hpp"

namespace ctes {

void ChillerSpec::validate() const {
  if (!(capacity_kwh_th > 0.0)) {
    throw ParameterError("chiller capacity must be positive, got " +
                         std::to_string(capacity_kwh_th));
  }
  if (!(cop_ref > 0.0)) {
    throw ParameterError("chiller reference COP must be positive, got " +
                         std::to_string(cop_ref));
  }
  if (!eirplr.nondecreasing_on_unit_interval()) {
    throw ParameterError(
        "EIRPLR curve must be nondecreasing on [0,1]; electric power would "
        "drop as the part-load ratio rises");
  }
}

void TesSpec::validate() const {
  if (!(capacity_kwh_th >= 0.0)) {
    throw ParameterError("TES capacity must be nonnegative, got " +
                         std::to_string(capacity_kwh_th));
  }
  if (!(one_way_efficiency > 0.0) || one_way_efficiency > 1.0) {
    throw ParameterError("TES one-way efficiency must lie in (0,1], got " +
                         std::to_string(one_way_efficiency));
  }
}

TesSpec TesSpec::from_round_trip(double capacity_kwh_th, double round_trip) {
  if (!(round_trip > 0.0) || round_trip > 1.0) {
    throw ParameterError("round-trip efficiency must lie in (0,1], got " +
                         std::to_string(round_trip));
  }
  TesSpec tes;
  tes.capacity_kwh_th = capacity_kwh_th;
  tes.one_way_efficiency = std::sqrt(round_trip);
  tes.validate();
  return tes;
}

double elec_power_kw(const ChillerSpec& chiller, double plr, double t_chw,
                     double t_cond) {
  if (!(plr >= 0.0) || plr > 1.0) {
    throw DomainError("part-load ratio must lie in [0,1], got " +
                      std::to_string(plr));
  }
  return chiller.q_ref_kw() * chiller.eirplr(plr) * chiller.capft(t_chw, t_cond) *
         chiller.eirft(t_chw, t_cond);
}

FeasibleBounds feasible_bounds(const ChillerSpec& chiller, const TesSpec& tes,
                               double load_kwh_th, double soc) {
  if (!(load_kwh_th >= 0.0)) {
    throw DomainError("cooling load must be nonnegative, got " +
                      std::to_string(load_kwh_th));
  }
  if (!(soc >= 0.0) || soc > tes.capacity_kwh_th + kSocTolerance) {
    throw StateError("storage level " + std::to_string(soc) +
                     " outside [0, " + std::to_string(tes.capacity_kwh_th) +
                     "]");
  }
  const double eta = tes.one_way_efficiency;
  const double c = chiller.capacity_kwh_th;
  FeasibleBounds b;
  b.lower = std::max(0.0, (load_kwh_th - eta * soc) / c);
  b.upper = std::min(
      1.0, (load_kwh_th + (tes.capacity_kwh_th - soc) / eta) / c);
  b.infeasible = b.lower > b.upper;
  return b;
}

TesTransition step_tes(const TesSpec& tes, double chiller_output_kwh_th,
                       double load_kwh_th, double soc) {
  if (!(chiller_output_kwh_th >= 0.0) || !(load_kwh_th >= 0.0) ||
      !(soc >= 0.0)) {
    throw DomainError("step_tes inputs must be nonnegative");
  }
  if (soc > tes.capacity_kwh_th + kSocTolerance) {
    throw DomainError("storage level " + std::to_string(soc) +
                      " exceeds capacity " +
                      std::to_string(tes.capacity_kwh_th));
  }
  const double eta = tes.one_way_efficiency;
  const double surplus = chiller_output_kwh_th - load_kwh_th;

  double loss =
      std::max(0.0, load_kwh_th - chiller_output_kwh_th - eta * soc);
  if (loss <= kSocTolerance) loss = 0.0;  // absorb fp hair at the boundary

  const double raw = surplus >= 0.0 ? soc + eta * surplus : soc + surplus / eta;

  TesTransition t;
  t.loss_of_load = loss;
  if (loss > 0.0) {
    // Demand exceeded chiller output plus a full discharge: storage drains.
    t.soc_next = 0.0;
  } else {
    t.soc_next = std::clamp(raw, 0.0, tes.capacity_kwh_th);
    if (raw > tes.capacity_kwh_th) {
      t.clamp_residue = raw - tes.capacity_kwh_th;
    } else if (raw < 0.0) {
      t.clamp_residue = -raw;
    }
  }
  return t;
}

double stage_cost(double price, double power_kw, double loss_of_load,
                  double lambda) {
  return price * power_kw + lambda * loss_of_load;
}

double stage_reward(double price, double power_kw, double loss_of_load,
                    double lambda) {
  return -stage_cost(price, power_kw, loss_of_load, lambda);
}

double default_loss_penalty(double max_price, double chiller_capacity_kwh_th) {
  return 10.0 * max_price * chiller_capacity_kwh_th;
}

std::vector<GridAction> masked_grid_actions(std::span<const double> grid,
                                            const FeasibleBounds& bounds) {
  if (grid.empty()) throw ParameterError("action grid is empty");

  std::vector<GridAction> out;
  if (bounds.infeasible) {
    out.push_back({static_cast<int>(grid.size()) - 1, 1.0});
    return out;
  }
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    const double g = grid[i];
    if (g >= bounds.lower - kGridSnapTolerance &&
        g <= bounds.upper + kGridSnapTolerance) {
      out.push_back({i, std::clamp(g, bounds.lower, bounds.upper)});
    }
  }
  if (out.empty()) {
    // The interval sits strictly between two grid points: take the nearest.
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
      const double d = grid[i] < bounds.lower ? bounds.lower - grid[i]
                                              : grid[i] - bounds.upper;
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    out.push_back({best, std::clamp(grid[best], bounds.lower, bounds.upper)});
  }
  return out;
}

}  // namespace ctes
