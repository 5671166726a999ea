#include "ctes/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctes/errors.hpp"
#include "ctes/rng.hpp"

namespace ctes {
namespace {

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

void check_record(const HourlyRecord& rec, std::size_t row) {
  if (rec.day < 1 || rec.day > 365) {
    throw SchemaError(row_label(row) + ": day " + std::to_string(rec.day) +
                      " outside 1..365");
  }
  if (rec.hour < 0 || rec.hour > 23) {
    throw SchemaError(row_label(row) + ": hour " + std::to_string(rec.hour) +
                      " outside 0..23");
  }
  if (!(rec.load_kwh_th >= 0.0) || !std::isfinite(rec.load_kwh_th)) {
    throw SchemaError(row_label(row) + ": load_kwh_th must be a nonnegative "
                      "finite value");
  }
  if (rec.source_prices.empty() ||
      rec.source_prices.size() != rec.availability.size()) {
    throw SchemaError(row_label(row) +
                      ": price and availability columns must both have length "
                      "M >= 1");
  }
  for (std::size_t i = 0; i < rec.source_prices.size(); ++i) {
    if (!(rec.source_prices[i] >= 0.0) || !std::isfinite(rec.source_prices[i])) {
      throw SchemaError(row_label(row) + ": price_" + std::to_string(i + 1) +
                        " must be a nonnegative finite value");
    }
    if (rec.availability[i] > 1) {
      throw SchemaError(row_label(row) + ": avail_" + std::to_string(i + 1) +
                        " must be 0 or 1");
    }
  }
  if (std::find(rec.availability.begin(), rec.availability.end(),
                std::uint8_t{1}) == rec.availability.end()) {
    throw AvailabilityError(row_label(row) +
                            ": every source is unavailable");
  }
}

void check_continuity(const HourlyRecord& prev, const HourlyRecord& cur,
                      std::size_t row) {
  int want_day = prev.day;
  int want_hour = prev.hour + 1;
  if (want_hour == 24) {
    want_hour = 0;
    ++want_day;
  }
  if (cur.day != want_day || cur.hour != want_hour) {
    throw ContinuityError(
        row_label(row) + ": expected (day " + std::to_string(want_day) +
        ", hour " + std::to_string(want_hour) + ") after (day " +
        std::to_string(prev.day) + ", hour " + std::to_string(prev.hour) +
        "), got (day " + std::to_string(cur.day) + ", hour " +
        std::to_string(cur.hour) + ")");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& column,
                    std::size_t row) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw SchemaError(row_label(row) + ": column '" + column +
                      "' has non-numeric value '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& text, const std::string& column,
              std::size_t row) {
  const double v = parse_double(text, column, row);
  const int i = static_cast<int>(std::llround(v));
  if (static_cast<double>(i) != v) {
    throw SchemaError(row_label(row) + ": column '" + column +
                      "' must be an integer, got '" + text + "'");
  }
  return i;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

const std::vector<TouBand>& default_tou_bands() {
  static const std::vector<TouBand> bands = {
      {0, 6, 3.0}, {6, 17, 6.0}, {17, 22, 9.5}, {22, 24, 3.0}};
  return bands;
}

double band_price(const std::vector<TouBand>& bands, int hour) {
  for (const TouBand& b : bands) {
    if (hour >= b.start_hour && hour < b.end_hour) return b.price;
  }
  throw ParameterError("time-of-use bands leave hour " + std::to_string(hour) +
                       " without a price");
}

}  // namespace

double min_available_price(const HourlyRecord& rec) {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < rec.source_prices.size(); ++i) {
    if (rec.availability[i]) {
      any = true;
      best = std::min(best, rec.source_prices[i]);
    }
  }
  if (!any) throw AvailabilityError("no electricity source is available");
  return best;
}

void validate_trace(const Trace& trace) {
  const int m = trace.num_sources();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const HourlyRecord& rec = trace.records[i];
    if (static_cast<int>(rec.source_prices.size()) != m) {
      throw SchemaError(row_label(i + 1) +
                        ": number of sources differs from the first record");
    }
    check_record(rec, i + 1);
    if (i > 0) check_continuity(trace.records[i - 1], rec, i + 1);
  }
}

Trace load_trace(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("trace file '" + path + "' is empty (header required)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };

  const int day_col = column(schema.day);
  const int hour_col = column(schema.hour);
  const int load_col = column(schema.load);
  if (day_col < 0 || hour_col < 0 || load_col < 0) {
    throw SchemaError("trace file '" + path + "' is missing column '" +
                      (day_col < 0 ? schema.day
                                   : (hour_col < 0 ? schema.hour : schema.load)) +
                      "'");
  }

  std::vector<int> price_cols;
  std::vector<int> avail_cols;
  for (int m = 1;; ++m) {
    const int pc = column(schema.price_prefix + std::to_string(m));
    const int ac = column(schema.avail_prefix + std::to_string(m));
    if (pc < 0 && ac < 0) break;
    if (pc < 0 || ac < 0) {
      throw SchemaError("trace file '" + path + "' has mismatched " +
                        schema.price_prefix + std::to_string(m) + "/" +
                        schema.avail_prefix + std::to_string(m) + " columns");
    }
    price_cols.push_back(pc);
    avail_cols.push_back(ac);
  }
  if (price_cols.empty()) {
    throw SchemaError("trace file '" + path + "' has no " +
                      schema.price_prefix + "1 column");
  }
  const int t_chw_col = column(schema.t_chw);
  const int t_cond_col = column(schema.t_cond);

  Trace trace;
  trace.source = path;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw SchemaError(row_label(row) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    HourlyRecord rec;
    rec.day = parse_int(fields[day_col], schema.day, row);
    rec.hour = parse_int(fields[hour_col], schema.hour, row);
    rec.load_kwh_th = parse_double(fields[load_col], schema.load, row);
    for (std::size_t m = 0; m < price_cols.size(); ++m) {
      rec.source_prices.push_back(parse_double(
          fields[price_cols[m]], schema.price_prefix + std::to_string(m + 1),
          row));
      const int flag = parse_int(fields[avail_cols[m]],
                                 schema.avail_prefix + std::to_string(m + 1),
                                 row);
      if (flag != 0 && flag != 1) {
        throw SchemaError(row_label(row) + ": column '" + schema.avail_prefix +
                          std::to_string(m + 1) + "' must be 0 or 1");
      }
      rec.availability.push_back(static_cast<std::uint8_t>(flag));
    }
    if (t_chw_col >= 0) {
      rec.t_chw = parse_double(fields[t_chw_col], schema.t_chw, row);
    }
    if (t_cond_col >= 0) {
      rec.t_cond = parse_double(fields[t_cond_col], schema.t_cond, row);
    }
    check_record(rec, row);
    if (!trace.records.empty()) {
      check_continuity(trace.records.back(), rec, row);
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

void save_trace_csv(const Trace& trace, const std::string& path,
                    const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write trace file '" + path + "'");

  const int m = trace.num_sources();
  std::string text = schema.day + "," + schema.hour + "," + schema.load;
  for (int i = 1; i <= m; ++i) text += "," + schema.price_prefix + std::to_string(i);
  for (int i = 1; i <= m; ++i) text += "," + schema.avail_prefix + std::to_string(i);
  text += "," + schema.t_chw + "," + schema.t_cond + "\n";

  for (const HourlyRecord& rec : trace.records) {
    text += std::to_string(rec.day);
    text += ',';
    text += std::to_string(rec.hour);
    text += ',';
    append_double(text, rec.load_kwh_th);
    for (double p : rec.source_prices) {
      text += ',';
      append_double(text, p);
    }
    for (std::uint8_t a : rec.availability) {
      text += ',';
      text += a ? '1' : '0';
    }
    text += ',';
    append_double(text, rec.t_chw);
    text += ',';
    append_double(text, rec.t_cond);
    text += '\n';
  }
  out << text;
}

Trace generate_synthetic_trace(const SyntheticParams& params,
                               std::uint64_t seed) {
  if (params.num_sources < 1) {
    throw ParameterError("num_sources must be >= 1, got " +
                         std::to_string(params.num_sources));
  }
  if (params.base_load < 0.0 || params.diurnal_amp < 0.0 ||
      params.seasonal_amp < 0.0 || params.noise_std < 0.0) {
    throw ParameterError(
        "base_load, diurnal_amp, seasonal_amp, and noise_std must be "
        "nonnegative");
  }
  if (params.outage_prob < 0.0 || params.outage_prob >= 1.0) {
    throw ParameterError("outage_prob must lie in [0, 1), got " +
                         std::to_string(params.outage_prob));
  }
  if (params.days < 1 || params.days > 365) {
    throw ParameterError("days must lie in 1..365, got " +
                         std::to_string(params.days));
  }
  if (!params.tou_bands.empty() &&
      static_cast<int>(params.tou_bands.size()) != params.num_sources) {
    throw ParameterError("tou_bands must have one schedule per source");
  }

  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  Rng rng(seed);
  Trace trace;
  trace.source = "synthetic";
  trace.seed = seed;
  trace.records.reserve(static_cast<std::size_t>(params.days) * 24);

  const double noise_half_width = params.noise_std * std::sqrt(3.0);

  for (int day = 1; day <= params.days; ++day) {
    // Seasonal peak near day 196 (mid-summer), diurnal peak at 15:00.
    const double seasonal =
        1.0 + params.seasonal_amp * std::sin(kTwoPi * (day - 105.25) / 365.0);
    for (int hour = 0; hour < 24; ++hour) {
      HourlyRecord rec;
      rec.day = day;
      rec.hour = hour;
      const double diurnal =
          1.0 + params.diurnal_amp * std::sin(kTwoPi * (hour - 9) / 24.0);
      double load = params.base_load * seasonal * diurnal;
      if (noise_half_width > 0.0) {
        load += rng.uniform(-noise_half_width, noise_half_width);
      }
      rec.load_kwh_th = std::max(0.0, load);

      for (int m = 0; m < params.num_sources; ++m) {
        const std::vector<TouBand>& bands =
            params.tou_bands.empty() ? default_tou_bands()
                                     : params.tou_bands[m];
        rec.source_prices.push_back(band_price(bands, hour));
      }
      rec.availability.assign(params.num_sources, 1);
      if (params.outage_prob > 0.0) {
        bool any = false;
        int attempts = 0;
        while (!any) {
          if (++attempts > 100000) {
            throw InternalError("outage re-sampling failed to terminate");
          }
          for (int m = 0; m < params.num_sources; ++m) {
            rec.availability[m] = rng.uniform() >= params.outage_prob ? 1 : 0;
            any = any || rec.availability[m];
          }
        }
      }
      rec.t_chw = params.t_chw;
      rec.t_cond = params.t_cond;
      trace.records.push_back(std::move(rec));
    }
  }
  validate_trace(trace);
  return trace;
}

}  // namespace ctes
