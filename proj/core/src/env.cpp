#include "ctes/env.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <fstream>
#include <string>

#include "ctes/errors.hpp"
#include "ctes/policies.hpp"

namespace ctes {
namespace {

void load_exogenous(SimState& state, const HourlyRecord& rec) {
  state.load = rec.load_kwh_th;
  state.price = min_available_price(rec);
  state.hour = rec.hour;
  state.day = rec.day;
  state.availability = rec.availability;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

Environment::Environment(const Trace& trace, PlantSpec plant)
    : trace_(&trace), plant_(std::move(plant)) {
  if (trace.empty()) throw DataError("trace is empty");
  plant_.validate();
}

SimState Environment::reset(double e_init) const {
  if (!(e_init >= 0.0) || e_init > plant_.tes.capacity_kwh_th) {
    throw DomainError("initial storage level " + std::to_string(e_init) +
                      " outside [0, " +
                      std::to_string(plant_.tes.capacity_kwh_th) + "]");
  }
  SimState state;
  state.k = 1;
  state.soc = e_init;
  load_exogenous(state, trace_->records.front());
  return state;
}

FeasibleBounds Environment::bounds(const SimState& state) const {
  return feasible_bounds(plant_.chiller, plant_.tes, state.load, state.soc);
}

StepOutcome Environment::step(SimState& state, double plr) const {
  if (done(state)) throw StateError("step past the end of the trace");

  const FeasibleBounds b = bounds(state);
  double executed;
  if (b.infeasible) {
    if (std::abs(plr - 1.0) > kSocTolerance) {
      throw MaskingViolationError(
          "state at k=" + std::to_string(state.k) +
          " is infeasible; the chiller must run at full capacity (plr=1), "
          "got " + std::to_string(plr));
    }
    executed = 1.0;
  } else {
    if (plr > b.upper + kSocTolerance) {
      throw MaskingViolationError(
          "plr " + std::to_string(plr) + " exceeds the upper bound " +
          std::to_string(b.upper) + " at k=" + std::to_string(state.k));
    }
    if (!(plr >= -kSocTolerance)) {
      throw MaskingViolationError("plr must be nonnegative, got " +
                                  std::to_string(plr));
    }
    executed = std::clamp(plr, 0.0, std::min(1.0, b.upper));
  }

  const HourlyRecord& rec = trace_->records[state.k - 1];
  const double output = executed * plant_.chiller.capacity_kwh_th;
  const TesTransition t = step_tes(plant_.tes, output, state.load, state.soc);
  assert(t.clamp_residue <= kSocTolerance && "masked action clamped the SoC");

  StepOutcome out;
  out.executed_plr = executed;
  out.power_kw = elec_power_kw(plant_.chiller, executed, rec.t_chw, rec.t_cond);
  out.cost = state.price * out.power_kw;
  out.loss_of_load = t.loss_of_load;
  out.tes_to_load = std::min(std::max(0.0, state.load - output),
                             plant_.tes.one_way_efficiency * state.soc);

  state.soc = t.soc_next;
  ++state.k;
  if (!done(state)) {
    load_exogenous(state, trace_->records[state.k - 1]);
  }
  return out;
}

EpisodeReport run_episode(Policy& policy, const Trace& trace,
                          const PlantSpec& plant, double e_init,
                          bool record_log) {
  Environment env(trace, plant);
  SimState state = env.reset(e_init);
  EpisodeReport report;
  if (record_log) report.log.reserve(trace.size());

  while (!env.done(state)) {
    const FeasibleBounds b = env.bounds(state);
    const double plr = policy.act(state, b);
    const StepLogRow pre{state.k,    state.day, state.hour, state.load,
                         state.price, 0.0,      state.soc,  0.0,
                         0.0,         0.0};
    const StepOutcome out = env.step(state, plr);
    report.f_elec += out.cost;
    report.total_lol += out.loss_of_load;
    if (out.loss_of_load > 0.0) ++report.lol_incidents;
    report.tes_throughput += out.tes_to_load;
    if (record_log) {
      StepLogRow row = pre;
      row.plr = out.executed_plr;
      row.power_kw = out.power_kw;
      row.cost = out.cost;
      row.lol = out.loss_of_load;
      report.log.push_back(row);
    }
  }
  return report;
}

void write_step_log_csv(const EpisodeReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write step log '" + path + "'");
  std::string text = "k,day,hour,load,price,plr,soc,power_kw,cost,lol\n";
  for (const StepLogRow& row : report.log) {
    text += std::to_string(row.k);
    text += ',';
    text += std::to_string(row.day);
    text += ',';
    text += std::to_string(row.hour);
    for (double v : {row.load, row.price, row.plr, row.soc, row.power_kw,
                     row.cost, row.lol}) {
      text += ',';
      append_double(text, v);
    }
    text += '\n';
  }
  out << text;
}

}  // namespace ctes
