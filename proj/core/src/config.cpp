#include "ctes/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ctes/errors.hpp"

namespace ctes {
namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ParameterError(std::string("config key '") + key +
                           "' has the wrong type");
    }
  }
}

BiquadraticCurve read_biquad(const json& j, const char* key,
                             BiquadraticCurve fallback) {
  if (auto it = j.find(key); it != j.end()) {
    const auto coeffs = it->get<std::vector<double>>();
    if (coeffs.size() != 6) {
      throw ParameterError(std::string("curve '") + key +
                           "' needs 6 coefficients");
    }
    BiquadraticCurve c;
    std::copy(coeffs.begin(), coeffs.end(), c.c.begin());
    return c;
  }
  return fallback;
}

QuadraticCurve read_quad(const json& j, const char* key,
                         QuadraticCurve fallback) {
  if (auto it = j.find(key); it != j.end()) {
    const auto coeffs = it->get<std::vector<double>>();
    if (coeffs.size() != 3) {
      throw ParameterError(std::string("curve '") + key +
                           "' needs 3 coefficients");
    }
    QuadraticCurve c;
    std::copy(coeffs.begin(), coeffs.end(), c.c.begin());
    return c;
  }
  return fallback;
}

void parse_plant(const json& j, PlantSpec& plant) {
  if (auto it = j.find("chiller"); it != j.end()) {
    const json& c = *it;
    read_if(c, "capacity_kwh_th", plant.chiller.capacity_kwh_th);
    read_if(c, "cop_ref", plant.chiller.cop_ref);
    read_if(c, "t_chw_ref", plant.chiller.t_chw_ref);
    read_if(c, "t_cond_ref", plant.chiller.t_cond_ref);
    plant.chiller.capft = read_biquad(c, "capft", plant.chiller.capft);
    plant.chiller.eirft = read_biquad(c, "eirft", plant.chiller.eirft);
    plant.chiller.eirplr = read_quad(c, "eirplr", plant.chiller.eirplr);
  }
  if (auto it = j.find("tes"); it != j.end()) {
    const json& t = *it;
    read_if(t, "capacity_kwh_th", plant.tes.capacity_kwh_th);
    if (auto rt = t.find("round_trip_efficiency"); rt != t.end()) {
      plant.tes = TesSpec::from_round_trip(plant.tes.capacity_kwh_th,
                                           rt->get<double>());
    }
  }
}

void parse_synthetic(const json& j, SyntheticParams& p) {
  read_if(j, "base_load", p.base_load);
  read_if(j, "diurnal_amp", p.diurnal_amp);
  read_if(j, "seasonal_amp", p.seasonal_amp);
  read_if(j, "noise_std", p.noise_std);
  read_if(j, "num_sources", p.num_sources);
  read_if(j, "outage_prob", p.outage_prob);
  read_if(j, "t_chw", p.t_chw);
  read_if(j, "t_cond", p.t_cond);
  read_if(j, "days", p.days);
  if (auto it = j.find("tou_bands"); it != j.end()) {
    p.tou_bands.clear();
    for (const json& source : *it) {
      std::vector<TouBand> bands;
      for (const json& band : source) {
        TouBand b;
        b.start_hour = band.at("start_hour").get<int>();
        b.end_hour = band.at("end_hour").get<int>();
        b.price = band.at("price").get<double>();
        bands.push_back(b);
      }
      p.tou_bands.push_back(std::move(bands));
    }
  }
}

void parse_economics(const json& j, EconomicParams& e) {
  read_if(j, "chiller_capex_rate", e.chiller_capex_rate);
  read_if(j, "tes_capex_rate", e.tes_capex_rate);
  read_if(j, "maintenance_fraction", e.maintenance_fraction);
  read_if(j, "maintenance_inflation", e.maintenance_inflation);
  read_if(j, "discount_rate", e.discount_rate);
  read_if(j, "horizon_years", e.horizon_years);
  if (auto it = j.find("discount_convention"); it != j.end()) {
    const std::string name = it->get<std::string>();
    if (name == "end") {
      e.discount_convention = DiscountConvention::kEndOfYear;
    } else if (name == "start") {
      e.discount_convention = DiscountConvention::kStartOfYear;
    } else {
      throw ParameterError("discount_convention must be 'end' or 'start'");
    }
  }
}

void parse_train(const json& j, TrainConfig& t) {
  read_if(j, "episodes", t.episodes);
  read_if(j, "gamma", t.gamma);
  read_if(j, "action_grid", t.action_grid);
  read_if(j, "epsilon_start", t.epsilon_start);
  read_if(j, "epsilon_end", t.epsilon_end);
  read_if(j, "epsilon_decay_fraction", t.epsilon_decay_fraction);
  read_if(j, "epsilon_fixed", t.epsilon_fixed);
  read_if(j, "replay_capacity", t.replay_capacity);
  read_if(j, "batch_size", t.batch_size);
  read_if(j, "update_period", t.update_period);
  read_if(j, "target_sync_period", t.target_sync_period);
  read_if(j, "learning_rate", t.learning_rate);
  read_if(j, "hidden", t.hidden);
  read_if(j, "penalty_lambda", t.penalty_lambda);
}

json synthetic_to_json(const SyntheticParams& p) {
  json j = {{"base_load", p.base_load},
            {"diurnal_amp", p.diurnal_amp},
            {"seasonal_amp", p.seasonal_amp},
            {"noise_std", p.noise_std},
            {"num_sources", p.num_sources},
            {"outage_prob", p.outage_prob},
            {"t_chw", p.t_chw},
            {"t_cond", p.t_cond},
            {"days", p.days}};
  if (!p.tou_bands.empty()) {
    json sources = json::array();
    for (const auto& bands : p.tou_bands) {
      json arr = json::array();
      for (const TouBand& b : bands) {
        arr.push_back({{"start_hour", b.start_hour},
                       {"end_hour", b.end_hour},
                       {"price", b.price}});
      }
      sources.push_back(arr);
    }
    j["tou_bands"] = sources;
  }
  return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("config must be a JSON object");

  RunConfig config;
  if (auto it = j.find("trace"); it != j.end()) {
    read_if(*it, "path", config.trace_path);
    if (auto syn = it->find("synthetic"); syn != it->end()) {
      parse_synthetic(*syn, config.synthetic);
    }
  }
  parse_plant(j, config.plant);
  if (auto it = j.find("economics"); it != j.end()) {
    parse_economics(*it, config.economics);
  }
  if (auto it = j.find("train"); it != j.end()) {
    parse_train(*it, config.train);
  }
  if (auto it = j.find("sweep"); it != j.end()) {
    if (auto c = it->find("candidates"); c != it->end()) {
      for (const json& pair : *c) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ParameterError(
              "sweep.candidates entries must be [c_ch, e_max] pairs");
        }
        config.candidates.push_back(
            {pair[0].get<double>(), pair[1].get<double>()});
      }
    }
    read_if(*it, "policy", config.sweep_policy);
  }
  read_if(j, "penalty_lambda", config.penalty_lambda);
  read_if(j, "e_init", config.e_init);
  read_if(j, "dp_soc_nodes", config.dp_soc_nodes);
  read_if(j, "seed", config.seed);
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string run_config_to_json(const RunConfig& config) {
  json j;
  json trace;
  if (!config.trace_path.empty()) trace["path"] = config.trace_path;
  trace["synthetic"] = synthetic_to_json(config.synthetic);
  j["trace"] = trace;
  j["chiller"] = {
      {"capacity_kwh_th", config.plant.chiller.capacity_kwh_th},
      {"cop_ref", config.plant.chiller.cop_ref},
      {"capft", config.plant.chiller.capft.c},
      {"eirft", config.plant.chiller.eirft.c},
      {"eirplr", config.plant.chiller.eirplr.c},
      {"t_chw_ref", config.plant.chiller.t_chw_ref},
      {"t_cond_ref", config.plant.chiller.t_cond_ref}};
  const double eta = config.plant.tes.one_way_efficiency;
  j["tes"] = {{"capacity_kwh_th", config.plant.tes.capacity_kwh_th},
              {"round_trip_efficiency", eta * eta}};
  j["economics"] = {
      {"chiller_capex_rate", config.economics.chiller_capex_rate},
      {"tes_capex_rate", config.economics.tes_capex_rate},
      {"maintenance_fraction", config.economics.maintenance_fraction},
      {"maintenance_inflation", config.economics.maintenance_inflation},
      {"discount_rate", config.economics.discount_rate},
      {"horizon_years", config.economics.horizon_years},
      {"discount_convention",
       config.economics.discount_convention == DiscountConvention::kEndOfYear
           ? "end"
           : "start"}};
  j["train"] = {{"episodes", config.train.episodes},
                {"gamma", config.train.gamma},
                {"action_grid", config.train.resolved_grid()},
                {"epsilon_start", config.train.epsilon_start},
                {"epsilon_end", config.train.epsilon_end},
                {"epsilon_decay_fraction", config.train.epsilon_decay_fraction},
                {"epsilon_fixed", config.train.epsilon_fixed},
                {"replay_capacity", config.train.replay_capacity},
                {"batch_size", config.train.batch_size},
                {"update_period", config.train.update_period},
                {"target_sync_period", config.train.target_sync_period},
                {"learning_rate", config.train.learning_rate},
                {"hidden", config.train.hidden},
                {"penalty_lambda", config.train.penalty_lambda}};
  json candidates = json::array();
  for (const CandidateSizing& c : config.candidates) {
    candidates.push_back({c.chiller_capacity, c.tes_capacity});
  }
  j["sweep"] = {{"candidates", candidates}, {"policy", config.sweep_policy}};
  j["penalty_lambda"] = config.penalty_lambda;
  j["e_init"] = config.e_init;
  j["dp_soc_nodes"] = config.dp_soc_nodes;
  j["seed"] = config.seed;
  return j.dump(2);
}

std::uint64_t config_hash(const std::string& canonical_json) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical_json) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string provenance_json(const std::string& command, const RunConfig& config,
                            const std::map<std::string, std::string>& extras) {
  const std::string canonical = run_config_to_json(config);
  json j;
  j["command"] = command;
  j["config"] = json::parse(canonical);
  j["config_hash"] = config_hash(canonical);
  j["seed"] = config.seed;
  j["version"] = std::string(kVersion);
  for (const auto& [key, value] : extras) j[key] = value;
  return j.dump(2);
}

Trace resolve_trace(const RunConfig& config) {
  if (!config.trace_path.empty()) return load_trace(config.trace_path);
  return generate_synthetic_trace(config.synthetic, config.seed);
}

}  // namespace ctes
