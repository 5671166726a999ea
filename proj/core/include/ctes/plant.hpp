#pragma once

#include <array>
#include <span>
#include <vector>

namespace ctes {

// EnergyPlus-style chiller reference conditions (deg C).
inline constexpr double kRefChwSupplyTempC = 6.67;
inline constexpr double kRefCondEnteringTempC = 29.44;

inline constexpr double kDefaultRoundTripEfficiency = 0.9;
// sqrt(0.9): charge and discharge losses split evenly.
inline constexpr double kDefaultOneWayEfficiency = 0.9486832980505138;

// Floating-point slack absorbed by SoC clamps and mask checks.
inline constexpr double kSocTolerance = 1e-9;
// Grid points within this distance of a feasibility bound count as feasible.
inline constexpr double kGridSnapTolerance = 1e-9;

// c0 + c1*x + c2*x^2 + c3*y + c4*y^2 + c5*x*y, clamped at 0.
struct BiquadraticCurve {
  std::array<double, 6> c{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};

  double operator()(double x, double y) const {
    const double v =
        c[0] + c[1] * x + c[2] * x * x + c[3] * y + c[4] * y * y + c[5] * x * y;
    return v < 0.0 ? 0.0 : v;
  }

  static BiquadraticCurve unit() { return {}; }
};

// c0 + c1*a + c2*a^2, clamped at 0.
struct QuadraticCurve {
  std::array<double, 3> c{0.0, 1.0, 0.0};

  double operator()(double a) const {
    const double v = c[0] + c[1] * a + c[2] * a * a;
    return v < 0.0 ? 0.0 : v;
  }

  // Derivative c1 + 2*c2*a is linear, so checking the endpoints suffices.
  bool nondecreasing_on_unit_interval() const {
    return c[1] >= 0.0 && c[1] + 2.0 * c[2] >= 0.0;
  }

  static QuadraticCurve identity() { return {}; }
};

struct ChillerSpec {
  double capacity_kwh_th = 700.0;  // rated thermal output per hour
  double cop_ref = 5.0;
  BiquadraticCurve capft = BiquadraticCurve::unit();
  BiquadraticCurve eirft = BiquadraticCurve::unit();
  QuadraticCurve eirplr = QuadraticCurve::identity();
  double t_chw_ref = kRefChwSupplyTempC;
  double t_cond_ref = kRefCondEnteringTempC;

  // Maximum electric draw at full load and reference temperatures (kW).
  double q_ref_kw() const { return capacity_kwh_th / cop_ref; }

  void validate() const;  // throws ParameterError
};

struct TesSpec {
  double capacity_kwh_th = 1500.0;                     // E_max
  double one_way_efficiency = kDefaultOneWayEfficiency;  // eta in (0, 1]

  void validate() const;  // throws ParameterError

  static TesSpec from_round_trip(double capacity_kwh_th, double round_trip);
};

struct PlantSpec {
  ChillerSpec chiller;
  TesSpec tes;

  void validate() const {
    chiller.validate();
    tes.validate();
  }
};

// Admissible PLR interval keeping the TES inside [0, E_max].
struct FeasibleBounds {
  double lower = 0.0;
  double upper = 1.0;
  bool infeasible = false;  // true iff lower > upper
};

// Electric power draw (kW) at the given part-load ratio and temperatures.
// Throws DomainError when plr is outside [0, 1].
double elec_power_kw(const ChillerSpec& chiller, double plr, double t_chw,
                     double t_cond);

// PLR interval admissible at load `load_kwh_th` and storage level `soc`.
// Throws StateError when soc is outside [0, E_max].
FeasibleBounds feasible_bounds(const ChillerSpec& chiller, const TesSpec& tes,
                               double load_kwh_th, double soc);

struct TesTransition {
  double soc_next = 0.0;
  double loss_of_load = 0.0;   // unmet thermal demand this hour
  double clamp_residue = 0.0;  // magnitude absorbed by a non-physical clamp
};

// One-hour storage transition for a given chiller thermal output.
// Surplus charges at efficiency eta, deficits discharge at 1/eta; the
// unmet remainder after a full discharge is reported as loss_of_load.
// clamp_residue is nonzero only when the raw update leaves [0, E_max]
// for a reason other than a loss-of-load drain; values above
// kSocTolerance indicate a masking bug upstream.
TesTransition step_tes(const TesSpec& tes, double chiller_output_kwh_th,
                       double load_kwh_th, double soc);

// Stage cost P*power + lambda*loss; the MDP objective minimized throughout.
double stage_cost(double price, double power_kw, double loss_of_load,
                  double lambda);

// Negated stage cost (reward convention).
double stage_reward(double price, double power_kw, double loss_of_load,
                    double lambda);

// Default loss-of-load penalty: 10 x max effective price x chiller capacity
// per kWh unmet, large enough that any feasible charging plan wins.
double default_loss_penalty(double max_price, double chiller_capacity_kwh_th);

// A discrete action made executable under the mask.
struct GridAction {
  int index = 0;    // position in the PLR grid
  double plr = 0.0;  // executable value (grid point clamped into the bounds)
};

// Executable actions for a sorted PLR grid under the mask. Infeasible states
// yield the single forced action PLR=1 at the last grid index. When no grid
// point intersects [lower, upper], the nearest grid point is clamped into the
// interval and returned as the only candidate.
std::vector<GridAction> masked_grid_actions(std::span<const double> grid,
                                            const FeasibleBounds& bounds);

}  // namespace ctes
