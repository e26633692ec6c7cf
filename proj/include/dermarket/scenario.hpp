// Forecast-error sampling, PV/load trace ingestion, and the coupling of
// day-ahead decisions into the real-time balancing reference.
#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dermarket/bilevel.hpp"
#include "dermarket/csv.hpp"
#include "dermarket/error.hpp"
#include "dermarket/market.hpp"

namespace dermarket {

/// Labeled sub-seed derivation: one top-level seed fans out to module
/// streams without correlation between labels.
inline uint64_t sub_seed(uint64_t top, const std::string& label) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  uint64_t z = top ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Zero-mean unit-variance Gaussian via the polar method on a mt19937_64
/// stream; only reproducibility per seed is contractual.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_() - 1.0;
      v = 2.0 * uniform_() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

 private:
  double uniform_() {
    return (rng_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Per-hour truncated forecast-error samples. Clamping keeps the
/// realized output within [0, G_cap]; mean-centering happens later, in
/// the ambiguity estimation.
struct ForecastSampleSet {
  std::vector<std::vector<double>> hours;  // delta samples, MWh
  double sigma_fraction = 0;
  uint64_t seed = 0;
};

inline ForecastSampleSet sample_forecast_errors(double sigma_fraction,
                                                const DsoForecast& forecast,
                                                int n, uint64_t seed) {
  if (!(sigma_fraction >= 0))
    throw Error(Errc::bad_value, "sigma_fraction must be >= 0");
  if (n < 1) throw Error(Errc::bad_value, "need n >= 1 samples");
  ForecastSampleSet out;
  out.sigma_fraction = sigma_fraction;
  out.seed = seed;
  double sigma = sigma_fraction * forecast.g_cap;
  for (size_t t = 0; t < forecast.hours.size(); ++t) {
    NormalSampler gauss(sub_seed(seed, "forecast-errors/hour-" + std::to_string(t)));
    double lo = -forecast.hours[t].generation;
    double hi = forecast.g_cap - forecast.hours[t].generation;
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i)
      samples[i] = std::clamp(sigma * gauss.next(), lo, hi);
    out.hours.push_back(std::move(samples));
  }
  return out;
}

inline void write_samples_csv(const std::string& path, const ForecastSampleSet& s) {
  CsvWriter w(path, {"hour", "sample_index", "delta_mwh"});
  for (size_t t = 0; t < s.hours.size(); ++t)
    for (size_t i = 0; i < s.hours[t].size(); ++i)
      w.row({fmt_num((long long)t), fmt_num((long long)i), fmt_num(s.hours[t][i])});
}

/// Per-RT-step balancing reference in MWh, the day-ahead net position
/// spread uniformly over the slots inside each DA hour.
struct RtReferenceSeries {
  std::vector<double> e_rt_mwh;  // length T * steps_per_hour
  int steps_per_hour = 0;

  double at_step(long step) const {
    if (step < 0 || step >= static_cast<long>(e_rt_mwh.size()))
      throw Error(Errc::misaligned_grids,
                  "rt step " + std::to_string(step) + " outside the horizon");
    return e_rt_mwh[step];
  }
};

inline RtReferenceSeries rt_reference(const DaDecision& decision,
                                      const TimeGrid& grid) {
  grid.validate();
  if (static_cast<int>(decision.hours.size()) != grid.num_hours)
    throw Error(Errc::misaligned_grids, "decision hours vs time grid");
  RtReferenceSeries s;
  s.steps_per_hour = grid.steps_per_hour();
  for (const auto& h : decision.hours) {
    double per_step = (h.e_das - h.e_dab) / s.steps_per_hour;
    for (int k = 0; k < s.steps_per_hour; ++k) s.e_rt_mwh.push_back(per_step);
  }
  return s;
}

/// Per-node time series on the RT grid. Values in kW.
struct TraceSet {
  long start_s = 0;
  double dt_s = 0;
  int steps = 0;
  std::map<int, std::vector<double>> series;  // node -> values per step

  double value(int node, int step) const {
    auto it = series.find(node);
    if (it == series.end()) return 0.0;
    return it->second[step];
  }
};

/// Loads a trace CSV (timestamp_s,node,value_kw). Every listed node must
/// cover every step of the horizon; holes raise TraceGap with the
/// missing timestamp. The unit suffix of the value column must match
/// `expected_unit` (kw or mw).
inline TraceSet load_trace_csv(const std::string& path, double dt_s,
                               const std::string& expected_unit = "kw") {
  CsvTable t = read_csv(path);
  int cts = t.require_column("timestamp_s", path);
  int cn = t.require_column("node", path);
  int cv = t.column("value_" + expected_unit);
  if (cv < 0) {
    // a value column with a different unit suffix is a unit error, a
    // missing value column altogether is a format error
    for (const auto& h : t.header)
      if (h.rfind("value_", 0) == 0)
        throw Error(Errc::unit_mismatch,
                    path + " carries " + h + ", expected value_" + expected_unit);
    throw Error(Errc::bad_value, "no value column in " + path);
  }

  std::map<int, std::map<long, double>> raw;
  long t_min = LONG_MAX, t_max = LONG_MIN;
  for (const auto& r : t.rows) {
    long ts = parse_int(r[cts], path);
    int node = static_cast<int>(parse_int(r[cn], path));
    raw[node][ts] = parse_num(r[cv], path);
    t_min = std::min(t_min, ts);
    t_max = std::max(t_max, ts);
  }
  if (raw.empty()) throw Error(Errc::bad_value, "empty trace: " + path);

  TraceSet out;
  out.start_s = t_min;
  out.dt_s = dt_s;
  out.steps = static_cast<int>((t_max - t_min) / static_cast<long>(dt_s)) + 1;
  for (auto& [node, values] : raw) {
    std::vector<double> v(out.steps);
    for (int k = 0; k < out.steps; ++k) {
      long ts = t_min + static_cast<long>(dt_s) * k;
      auto it = values.find(ts);
      if (it == values.end())
        throw Error(Errc::trace_gap, path + ": node " + std::to_string(node) +
                                         " missing timestamp " + std::to_string(ts));
      v[k] = it->second;
    }
    out.series[node] = std::move(v);
  }
  return out;
}

}  // namespace dermarket
