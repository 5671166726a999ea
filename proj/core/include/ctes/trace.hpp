#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctes/plant.hpp"

namespace ctes {

// One hour of exogenous inputs: demand, tariffs, availability, temperatures.
struct HourlyRecord {
  int day = 1;    // 1..365
  int hour = 0;   // 0..23
  double load_kwh_th = 0.0;
  std::vector<double> source_prices;        // currency per kWh_e, length M
  std::vector<std::uint8_t> availability;   // 0/1 flags, length M, >=1 set
  double t_chw = kRefChwSupplyTempC;
  double t_cond = kRefCondEnteringTempC;
};

// Least price among the currently available sources.
// Throws AvailabilityError when no source is available.
double min_available_price(const HourlyRecord& rec);

struct Trace {
  std::vector<HourlyRecord> records;
  std::string source;       // file path or generator label
  std::uint64_t seed = 0;   // generator seed when synthetic

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  int num_sources() const {
    return records.empty() ? 0
                           : static_cast<int>(records.front().source_prices.size());
  }
};

// Re-checks every record invariant plus hour-by-hour continuity.
// Throws SchemaError / AvailabilityError / ContinuityError.
void validate_trace(const Trace& trace);

// Column names of the CSV wire format. Price/availability columns are
// price_1..price_M and avail_1..avail_M; temperatures are optional.
struct CsvSchema {
  std::string day = "day";
  std::string hour = "hour";
  std::string load = "load_kwh_th";
  std::string price_prefix = "price_";
  std::string avail_prefix = "avail_";
  std::string t_chw = "t_chw";
  std::string t_cond = "t_cond";
};

// Loads and validates a trace CSV (header required). When the temperature
// columns are absent, both default to the chiller reference temperatures so
// the temperature curves evaluate to 1.
Trace load_trace(const std::string& path, const CsvSchema& schema = {});

void save_trace_csv(const Trace& trace, const std::string& path,
                    const CsvSchema& schema = {});

// Flat-rate band over [start_hour, end_hour) of every day.
struct TouBand {
  int start_hour = 0;
  int end_hour = 24;
  double price = 5.0;
};

struct SyntheticParams {
  double base_load = 500.0;    // kWh_th
  double diurnal_amp = 0.4;    // relative, >= 0
  double seasonal_amp = 0.3;   // relative, >= 0
  double noise_std = 0.0;      // kWh_th, bounded uniform noise
  int num_sources = 1;
  // Per-source tariff schedule; empty selects the built-in three-band
  // time-of-use default for every source.
  std::vector<std::vector<TouBand>> tou_bands;
  double outage_prob = 0.0;    // per source-hour, in [0, 1)
  double t_chw = kRefChwSupplyTempC;
  double t_cond = kRefCondEnteringTempC;
  int days = 365;              // trace length in days (24 records each)
};

// Deterministic synthetic year: seasonal x diurnal sinusoid load with bounded
// noise, time-of-use tariffs, and re-sampled outages so at least one source is
// available every hour. Identical (params, seed) give identical traces.
Trace generate_synthetic_trace(const SyntheticParams& params,
                               std::uint64_t seed);

}  // namespace ctes
