// ctes command-line tool: synthetic trace generation, policy simulation,
// DQN training, DP-oracle inspection, sizing sweeps, and LCC reports.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ctes/config.hpp"
#include "ctes/dqn.hpp"
#include "ctes/env.hpp"
#include "ctes/errors.hpp"
#include "ctes/oracle.hpp"
#include "ctes/policies.hpp"
#include "ctes/sizing.hpp"
#include "ctes/trace.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ctes;

// Exit codes shared with the test suites.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitMasking = 4;
constexpr int kExitDivergence = 5;
constexpr int kExitInfeasible = 6;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool pretty = false;
};

RunConfig resolve_config(const GlobalOptions& global) {
  RunConfig config;
  if (!global.config_path.empty()) {
    config = load_run_config(global.config_path);
  }
  if (global.seed) config.seed = *global.seed;
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

void write_provenance(const GlobalOptions& global, const std::string& command,
                      const RunConfig& config,
                      std::map<std::string, std::string> extras) {
  fs::create_directories(global.out_dir);
  extras["jobs"] = std::to_string(global.jobs);
  write_text(fs::path(global.out_dir) / (command + "_provenance.json"),
             provenance_json(command, config, extras) + "\n");
}

std::string report_json(const EpisodeReport& report,
                        const std::string& policy_name) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "{\n"
     << "  \"policy\": \"" << policy_name << "\",\n"
     << "  \"f_elec\": " << report.f_elec << ",\n"
     << "  \"total_lol\": " << report.total_lol << ",\n"
     << "  \"lol_incidents\": " << report.lol_incidents << ",\n"
     << "  \"tes_throughput\": " << report.tes_throughput << "\n"
     << "}\n";
  return os.str();
}

void print_report(const EpisodeReport& report, const std::string& name,
                  bool pretty) {
  if (!pretty) return;
  std::cout << "policy " << name << ": f_elec=" << std::fixed
            << std::setprecision(2) << report.f_elec
            << " total_lol=" << report.total_lol
            << " incidents=" << report.lol_incidents
            << " tes_throughput=" << report.tes_throughput << "\n";
}

void print_sweep_table(const std::vector<SizingResult>& results) {
  std::cout << std::left << std::setw(8) << "c_ch" << std::setw(8) << "e_max"
            << std::right << std::setw(14) << "f_elec" << std::setw(12)
            << "total_lol" << std::setw(14) << "opex" << std::setw(14) << "lcc"
            << std::setw(10) << "feasible" << "\n";
  for (const SizingResult& r : results) {
    std::cout << std::left << std::setw(8) << r.theta.chiller_capacity
              << std::setw(8) << r.theta.tes_capacity << std::right
              << std::fixed << std::setprecision(0) << std::setw(14) << r.f_elec
              << std::setw(12) << r.total_lol << std::setw(14) << r.opex
              << std::setw(14) << r.lcc << std::setw(10)
              << (r.feasible ? "yes" : "no") << "\n";
  }
}

int cmd_generate(const GlobalOptions& global, const std::string& out_path) {
  RunConfig config = resolve_config(global);
  const Trace trace = generate_synthetic_trace(config.synthetic, config.seed);
  save_trace_csv(trace, out_path);
  write_provenance(global, "generate", config, {{"trace_out", out_path}});
  if (global.pretty) {
    std::cout << "wrote " << trace.size() << " hourly records to " << out_path
              << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& global, const std::string& policy_name,
                 const std::string& trace_flag, const std::string& weights,
                 bool log_steps, std::optional<double> e_init_flag) {
  RunConfig config = resolve_config(global);
  if (!trace_flag.empty()) config.trace_path = trace_flag;
  if (e_init_flag) config.e_init = *e_init_flag;
  const Trace trace = resolve_trace(config);

  std::unique_ptr<Policy> owned;
  std::optional<TrainedPolicy> trained;
  std::optional<ValueTable> table;
  Policy* policy = nullptr;

  if (policy_name == "dqn") {
    if (weights.empty()) {
      throw ParameterError("--policy dqn requires --weights <artifact.json>");
    }
    trained.emplace(load_policy(weights));
    policy = &*trained;
  } else if (policy_name == "oracle") {
    DpConfig dp;
    dp.soc_nodes = config.dp_soc_nodes;
    dp.action_grid = config.train.resolved_grid();
    dp.penalty_lambda = config.penalty_lambda;
    table.emplace(dp_solve(trace, config.plant, dp));
    owned = std::make_unique<OraclePolicy>(*table);
    policy = owned.get();
  } else {
    owned = make_baseline_policy(policy_name);
    policy = owned.get();
  }

  const EpisodeReport report =
      run_episode(*policy, trace, config.plant, config.e_init, log_steps);

  fs::create_directories(global.out_dir);
  write_text(fs::path(global.out_dir) / "report.json",
             report_json(report, policy_name));
  if (log_steps) {
    write_step_log_csv(report,
                       (fs::path(global.out_dir) / "steps.csv").string());
  }
  write_provenance(global, "simulate", config,
                   {{"policy", policy_name},
                    {"weights", weights},
                    {"trace", trace.source}});
  print_report(report, policy_name, global.pretty);
  return kExitOk;
}

int cmd_train(const GlobalOptions& global, const std::string& trace_flag,
              std::optional<int> episodes_flag, bool epsilon_fixed) {
  RunConfig config = resolve_config(global);
  if (!trace_flag.empty()) config.trace_path = trace_flag;
  if (episodes_flag) config.train.episodes = *episodes_flag;
  if (epsilon_fixed) config.train.epsilon_fixed = true;
  config.train.seed = config.seed;
  if (config.train.penalty_lambda < 0.0) {
    config.train.penalty_lambda = config.penalty_lambda;
  }
  const Trace trace = resolve_trace(config);

  const TrainResult result = train(trace, config.plant, config.train);
  for (const std::string& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }

  fs::create_directories(global.out_dir);
  const fs::path weights_path = fs::path(global.out_dir) / "weights.json";
  save_policy(result.policy, weights_path.string());
  write_training_curve_csv(
      result.curve,
      (fs::path(global.out_dir) / "training_curve.csv").string());
  write_provenance(global, "train", config,
                   {{"weights_out", weights_path.string()},
                    {"trace", trace.source}});
  if (global.pretty && !result.curve.empty()) {
    const EpisodeStat& last = result.curve.back();
    std::cout << "trained " << result.curve.size()
              << " episodes; final cost=" << last.total_cost
              << " lol=" << last.total_lol << "\n";
  }
  return kExitOk;
}

int cmd_oracle(const GlobalOptions& global, const std::string& trace_flag,
               std::optional<int> soc_nodes_flag) {
  RunConfig config = resolve_config(global);
  if (!trace_flag.empty()) config.trace_path = trace_flag;
  if (soc_nodes_flag) config.dp_soc_nodes = *soc_nodes_flag;
  const Trace trace = resolve_trace(config);

  DpConfig dp;
  dp.soc_nodes = config.dp_soc_nodes;
  dp.action_grid = config.train.resolved_grid();
  dp.penalty_lambda = config.penalty_lambda;
  const ValueTable table = dp_solve(trace, config.plant, dp);

  fs::create_directories(global.out_dir);
  write_value_table_csv(table,
                        (fs::path(global.out_dir) / "value_table.csv").string());

  OraclePolicy policy(table);
  const double rollout =
      grid_rollout_cost(policy, trace, config.plant, dp, config.e_init);
  const int start_node = table.nearest_node(config.e_init);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "{\n  \"optimal_cost\": " << table.value(1, start_node)
     << ",\n  \"grid_rollout_cost\": " << rollout
     << ",\n  \"soc_nodes\": " << table.num_nodes() << "\n}\n";
  write_text(fs::path(global.out_dir) / "report.json", os.str());
  write_provenance(global, "oracle", config, {{"trace", trace.source}});
  if (global.pretty) {
    std::cout << "optimal cost from empty storage: "
              << table.value(1, start_node) << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& global, const std::string& policy_flag,
              std::optional<int> episodes_flag) {
  RunConfig config = resolve_config(global);
  if (!policy_flag.empty()) config.sweep_policy = policy_flag;
  if (episodes_flag) config.train.episodes = *episodes_flag;
  if (config.candidates.empty()) {
    throw ParameterError("sweep needs sweep.candidates in the config file");
  }
  const Trace trace = resolve_trace(config);

  SweepConfig sweep_config;
  sweep_config.candidates = config.candidates;
  sweep_config.policy = config.sweep_policy;
  sweep_config.train = config.train;
  sweep_config.penalty_lambda = config.penalty_lambda;
  sweep_config.e_init = config.e_init;
  sweep_config.master_seed = config.seed;
  sweep_config.jobs = global.jobs;

  const std::vector<SizingResult> results =
      sweep(sweep_config, trace, config.plant, config.economics);

  fs::create_directories(global.out_dir);
  write_sweep_csv(results, (fs::path(global.out_dir) / "sweep.csv").string());
  write_sweep_summary_json(
      results, (fs::path(global.out_dir) / "sweep_summary.json").string());
  write_provenance(global, "sweep", config, {{"trace", trace.source}});
  if (global.pretty) print_sweep_table(results);

  // The reports are written either way; a sweep with no feasible candidate
  // exits with the infeasible-sizing code.
  select_optimal(results);
  return kExitOk;
}

int cmd_lcc(const GlobalOptions& global, const std::string& input_path) {
  RunConfig config = resolve_config(global);
  const std::vector<MeasuredCandidate> rows =
      load_measured_candidates_csv(input_path);
  if (rows.empty()) {
    throw ParameterError("results file '" + input_path + "' has no rows");
  }
  std::vector<SizingResult> results;
  results.reserve(rows.size());
  for (const MeasuredCandidate& row : rows) {
    results.push_back(lcc(row.theta, row.f_elec, row.total_lol,
                          config.economics));
  }

  fs::create_directories(global.out_dir);
  write_sweep_csv(results, (fs::path(global.out_dir) / "lcc.csv").string());
  write_sweep_summary_json(
      results, (fs::path(global.out_dir) / "lcc_summary.json").string());
  write_provenance(global, "lcc", config, {{"input", input_path}});
  if (global.pretty) print_sweep_table(results);

  const SizingResult& best = select_optimal(results);
  if (global.pretty) {
    std::cout << "optimal sizing: (" << best.theta.chiller_capacity << ", "
              << best.theta.tes_capacity << ") with LCC " << std::fixed
              << std::setprecision(0) << best.lcc << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chiller + thermal-energy-storage operation and sizing toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON config document");
  app.add_option("--seed", global.seed, "master RNG seed");
  app.add_option("--out-dir", global.out_dir, "output directory");
  app.add_option("--jobs", global.jobs, "concurrent sweep candidates");
  app.add_flag("--pretty", global.pretty, "print human-readable tables");

  auto* generate = app.add_subcommand("generate", "write a synthetic trace CSV");
  std::string gen_out = "trace.csv";
  generate->add_option("--out", gen_out, "output CSV path");

  auto* simulate = app.add_subcommand("simulate", "run one policy over a trace");
  std::string sim_policy = "greedy";
  std::string sim_trace;
  std::string sim_weights;
  bool sim_log_steps = false;
  std::optional<double> sim_e_init;
  simulate->add_option("--policy", sim_policy,
                       "greedy|tfp|sdpp|dqn|oracle");
  simulate->add_option("--trace", sim_trace, "trace CSV path");
  simulate->add_option("--weights", sim_weights, "trained policy artifact");
  simulate->add_flag("--log-steps", sim_log_steps, "write the per-step CSV");
  simulate->add_option("--e-init", sim_e_init, "initial storage level");

  auto* train_cmd = app.add_subcommand("train", "train the DQN policy");
  std::string train_trace;
  std::optional<int> train_episodes;
  bool train_eps_fixed = false;
  train_cmd->add_option("--trace", train_trace, "trace CSV path");
  train_cmd->add_option("--episodes", train_episodes, "training episodes");
  train_cmd->add_flag("--epsilon-fixed", train_eps_fixed,
                      "hold epsilon constant instead of decaying");

  auto* oracle_cmd =
      app.add_subcommand("oracle", "solve the exact DP on a short trace");
  std::string oracle_trace;
  std::optional<int> oracle_nodes;
  oracle_cmd->add_option("--trace", oracle_trace, "trace CSV path");
  oracle_cmd->add_option("--soc-nodes", oracle_nodes, "SoC grid nodes");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "evaluate sizing candidates end to end");
  std::string sweep_policy;
  std::optional<int> sweep_episodes;
  sweep_cmd->add_option("--policy", sweep_policy, "dqn|greedy|tfp|sdpp");
  sweep_cmd->add_option("--episodes", sweep_episodes,
                        "training episodes per candidate");

  auto* lcc_cmd =
      app.add_subcommand("lcc", "life-cycle costs from measured results");
  std::string lcc_input;
  lcc_cmd->add_option("--input", lcc_input, "CSV of c_ch,e_max,f_elec rows")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(global, gen_out);
    if (simulate->parsed()) {
      return cmd_simulate(global, sim_policy, sim_trace, sim_weights,
                          sim_log_steps, sim_e_init);
    }
    if (train_cmd->parsed()) {
      return cmd_train(global, train_trace, train_episodes, train_eps_fixed);
    }
    if (oracle_cmd->parsed()) {
      return cmd_oracle(global, oracle_trace, oracle_nodes);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(global, sweep_policy, sweep_episodes);
    }
    if (lcc_cmd->parsed()) return cmd_lcc(global, lcc_input);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MaskingViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMasking;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const InfeasibleSizingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
