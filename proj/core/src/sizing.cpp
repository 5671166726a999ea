#include "ctes/sizing.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ctes/errors.hpp"

namespace ctes {
namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

SizingResult evaluate_candidate(const CandidateSizing& theta,
                                const SweepConfig& config, const Trace& trace,
                                const PlantSpec& plant_template,
                                const EconomicParams& econ) {
  PlantSpec plant = plant_template;
  plant.chiller.capacity_kwh_th = theta.chiller_capacity;
  plant.tes.capacity_kwh_th = theta.tes_capacity;
  plant.validate();

  try {
    EpisodeReport report;
    if (config.policy == "dqn") {
      TrainConfig train_config = config.train;
      train_config.penalty_lambda = config.penalty_lambda >= 0.0
                                        ? config.penalty_lambda
                                        : train_config.penalty_lambda;
      const std::uint64_t theta_hash =
          mix_seed(static_cast<std::uint64_t>(theta.chiller_capacity * 1000.0),
                   static_cast<std::uint64_t>(theta.tes_capacity * 1000.0));
      train_config.seed = mix_seed(config.master_seed, theta_hash);
      TrainResult trained = train(trace, plant, train_config);
      report = run_episode(trained.policy, trace, plant, config.e_init);
    } else {
      auto policy = make_baseline_policy(config.policy);
      report = run_episode(*policy, trace, plant, config.e_init);
    }
    SizingResult result = lcc(theta, report.f_elec, report.total_lol, econ);
    result.lol_incidents = report.lol_incidents;
    result.tes_throughput = report.tes_throughput;
    return result;
  } catch (const DivergenceError& e) {
    SizingResult result = lcc(theta, 0.0, 0.0, econ);
    result.feasible = false;
    result.evaluation_failed = true;
    result.failure = e.what();
    return result;
  }
}

}  // namespace

void EconomicParams::validate() const {
  if (chiller_capex_rate < 0.0 || tes_capex_rate < 0.0 ||
      maintenance_fraction < 0.0 || maintenance_inflation < 0.0) {
    throw ParameterError("economic rates must be nonnegative");
  }
  if (!(discount_rate > 0.0) || discount_rate >= 1.0) {
    throw ParameterError("discount rate must lie in (0,1)");
  }
  if (horizon_years < 1) throw ParameterError("horizon must be at least one year");
}

Capex capex(const CandidateSizing& theta, const EconomicParams& econ) {
  if (theta.chiller_capacity < 0.0 || theta.tes_capacity < 0.0) {
    throw ParameterError("capacities must be nonnegative");
  }
  Capex c;
  c.chiller = econ.chiller_capex_rate * theta.chiller_capacity;
  c.tes = econ.tes_capex_rate * theta.tes_capacity;
  c.total = c.chiller + c.tes;
  return c;
}

double opex(double annual_elec_cost, double capex_total,
            const EconomicParams& econ) {
  econ.validate();
  if (annual_elec_cost < 0.0 || capex_total < 0.0) {
    throw ParameterError("opex inputs must be nonnegative");
  }
  double total = 0.0;
  for (int i = 1; i <= econ.horizon_years; ++i) {
    const double maintenance = econ.maintenance_fraction * capex_total *
                               std::pow(1.0 + econ.maintenance_inflation, i - 1);
    const int exponent =
        econ.discount_convention == DiscountConvention::kEndOfYear ? i : i - 1;
    total += (annual_elec_cost + maintenance) /
             std::pow(1.0 + econ.discount_rate, exponent);
  }
  return total;
}

SizingResult lcc(const CandidateSizing& theta, double f_elec, double total_lol,
                 const EconomicParams& econ) {
  const Capex c = capex(theta, econ);
  SizingResult r;
  r.theta = theta;
  r.capex_chiller = c.chiller;
  r.capex_tes = c.tes;
  r.f_elec = f_elec;
  r.opex = opex(f_elec, c.total, econ);
  r.lcc = c.total + r.opex;
  r.total_lol = total_lol;
  r.feasible = total_lol == 0.0;
  return r;
}

std::vector<SizingResult> sweep(const SweepConfig& config, const Trace& trace,
                                const PlantSpec& plant_template,
                                const EconomicParams& econ) {
  if (config.candidates.empty()) {
    throw ParameterError("sweep needs at least one sizing candidate");
  }
  econ.validate();
  if (config.policy != "dqn") {
    make_baseline_policy(config.policy);  // validates the name up front
  }

  std::vector<SizingResult> results(config.candidates.size());
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1 || config.candidates.size() == 1) {
    for (std::size_t i = 0; i < config.candidates.size(); ++i) {
      results[i] = evaluate_candidate(config.candidates[i], config, trace,
                                      plant_template, econ);
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < config.candidates.size();
             i = next.fetch_add(1)) {
          results[i] = evaluate_candidate(config.candidates[i], config, trace,
                                          plant_template, econ);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

const SizingResult& select_optimal(std::span<const SizingResult> results) {
  const SizingResult* best = nullptr;
  for (const SizingResult& r : results) {
    if (!r.feasible || r.evaluation_failed) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    const double best_capex = best->capex_chiller + best->capex_tes;
    const double r_capex = r.capex_chiller + r.capex_tes;
    if (r.lcc < best->lcc ||
        (r.lcc == best->lcc &&
         (r_capex < best_capex ||
          (r_capex == best_capex &&
           r.theta.chiller_capacity < best->theta.chiller_capacity)))) {
      best = &r;
    }
  }
  if (best == nullptr) {
    std::string detail = "no sizing candidate achieved zero loss-of-load:";
    for (const SizingResult& r : results) {
      detail += " (" + std::to_string(r.theta.chiller_capacity) + "," +
                std::to_string(r.theta.tes_capacity) +
                ") lol=" + std::to_string(r.total_lol) +
                (r.evaluation_failed ? " [failed]" : "") + ";";
    }
    throw InfeasibleSizingError(detail);
  }
  return *best;
}

void write_sweep_csv(std::span<const SizingResult> results,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write sweep report '" + path + "'");
  std::string text =
      "c_ch,e_max,capex_ch,capex_tes,f_elec,total_lol,lol_incidents,"
      "tes_throughput,opex,lcc,feasible\n";
  for (const SizingResult& r : results) {
    append_double(text, r.theta.chiller_capacity);
    text += ',';
    append_double(text, r.theta.tes_capacity);
    for (double v : {r.capex_chiller, r.capex_tes, r.f_elec, r.total_lol}) {
      text += ',';
      append_double(text, v);
    }
    text += ',';
    text += std::to_string(r.lol_incidents);
    text += ',';
    append_double(text, r.tes_throughput);
    text += ',';
    append_double(text, r.opex);
    text += ',';
    append_double(text, r.lcc);
    text += ',';
    text += r.feasible ? '1' : '0';
    text += '\n';
  }
  out << text;
}

void write_sweep_summary_json(std::span<const SizingResult> results,
                              const std::string& path) {
  nlohmann::json j;
  j["num_candidates"] = results.size();
  nlohmann::json rows = nlohmann::json::array();
  for (const SizingResult& r : results) {
    rows.push_back({{"c_ch", r.theta.chiller_capacity},
                    {"e_max", r.theta.tes_capacity},
                    {"f_elec", r.f_elec},
                    {"total_lol", r.total_lol},
                    {"lol_incidents", r.lol_incidents},
                    {"tes_throughput", r.tes_throughput},
                    {"capex", r.capex_chiller + r.capex_tes},
                    {"opex", r.opex},
                    {"lcc", r.lcc},
                    {"feasible", r.feasible},
                    {"evaluation_failed", r.evaluation_failed}});
  }
  j["candidates"] = rows;
  try {
    const SizingResult& best = select_optimal(results);
    j["optimal"] = {{"c_ch", best.theta.chiller_capacity},
                    {"e_max", best.theta.tes_capacity},
                    {"lcc", best.lcc}};
  } catch (const InfeasibleSizingError&) {
    j["optimal"] = nullptr;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write sweep summary '" + path + "'");
  out << j.dump(2) << '\n';
}

std::vector<MeasuredCandidate> load_measured_candidates_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("results file '" + path + "' is empty (header required)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int c_col = column("c_ch");
  const int e_col = column("e_max");
  const int f_col = column("f_elec");
  const int l_col = column("total_lol");
  if (c_col < 0 || e_col < 0 || f_col < 0) {
    throw SchemaError("results file '" + path +
                      "' needs columns c_ch, e_max, f_elec");
  }

  std::vector<MeasuredCandidate> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < header.size()) {
      throw SchemaError("row " + std::to_string(row) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    auto value = [&](int col) {
      double v = 0.0;
      const std::string& text = fields[col];
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw SchemaError("row " + std::to_string(row) + ": column '" +
                          header[col] + "' has non-numeric value '" + text + "'");
      }
      return v;
    };
    MeasuredCandidate m;
    m.theta.chiller_capacity = value(c_col);
    m.theta.tes_capacity = value(e_col);
    m.f_elec = value(f_col);
    m.total_lol = l_col >= 0 ? value(l_col) : 0.0;
    rows.push_back(m);
  }
  return rows;
}

}  // namespace ctes
