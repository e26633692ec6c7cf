// Market domain types: block curves, time grid, balancing-price model,
// aggregated DSO forecast. All types are immutable once constructed and
// safe to share across concurrent readers.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dermarket/csv.hpp"
#include "dermarket/error.hpp"

namespace dermarket {

enum class Side { supply, demand };

inline const char* side_name(Side s) {
  return s == Side::supply ? "supply" : "demand";
}

/// One price-quantity step of a stepwise offering or bidding curve.
/// The quantity is the block's cap; price in EUR/MWh, quantity in MWh.
struct Block {
  double price = 0.0;
  double quantity = 0.0;
  int index = 0;
};

/// Stepwise supply or demand curve for a single delivery hour.
/// Supply curves are sorted by nondecreasing price, demand curves by
/// nonincreasing price. Ties keep input order (stable sort).
struct BlockCurve {
  Side side = Side::supply;
  int hour = 0;
  std::vector<Block> blocks;

  double total_quantity() const {
    double q = 0;
    for (const auto& b : blocks) q += b.quantity;
    return q;
  }
  double min_price() const {
    double p = blocks.empty() ? 0.0 : blocks.front().price;
    for (const auto& b : blocks) p = std::min(p, b.price);
    return p;
  }
  double max_price() const {
    double p = blocks.empty() ? 0.0 : blocks.front().price;
    for (const auto& b : blocks) p = std::max(p, b.price);
    return p;
  }
};

/// Day-ahead/real-time slot structure. Slot lengths in seconds.
struct TimeGrid {
  int num_hours = 24;       // T
  double dt_da_s = 3600.0;  // DA slot length
  double dt_rt_s = 5.0;     // RT slot length

  void validate() const {
    if (num_hours < 1) throw Error(Errc::bad_value, "TimeGrid: T must be >= 1");
    if (dt_da_s <= 0 || dt_rt_s <= 0)
      throw Error(Errc::bad_value, "TimeGrid: slot lengths must be positive");
    double ratio = dt_da_s / dt_rt_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw Error(Errc::misaligned_grids,
                  "dt_da must be an integer multiple of dt_rt");
  }
  int steps_per_hour() const { return static_cast<int>(std::round(dt_da_s / dt_rt_s)); }
};

/// Balancing-market price model: the DSO sells surplus at
/// pr_plus = a1*(da_price - p1) and buys deficit at
/// pr_minus = a2*(da_price + p2). No clamping is applied, so pr_plus may
/// go negative for DA prices below p1.
struct ImbalancePriceModel {
  double a1 = 0.7;
  double a2 = 1.7;
  double p1 = 15.0;  // EUR/MWh
  double p2 = 20.0;  // EUR/MWh

  void validate() const {
    if (!(a1 >= 0.0) || !(a2 >= 0.0))
      throw Error(Errc::bad_value, "ImbalancePriceModel: a1, a2 must be >= 0");
    if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(p1) ||
        !std::isfinite(p2))
      throw Error(Errc::bad_value, "ImbalancePriceModel: non-finite parameter");
  }
};

struct ImbalancePrices {
  double pr_plus = 0.0;   // EUR/MWh received for surplus
  double pr_minus = 0.0;  // EUR/MWh paid for deficit
};

inline ImbalancePrices imbalance_prices(const ImbalancePriceModel& m,
                                        double da_price) {
  m.validate();
  if (!std::isfinite(da_price))
    throw Error(Errc::bad_value, "imbalance_prices: non-finite DA price");
  return {m.a1 * (da_price - m.p1), m.a2 * (da_price + m.p2)};
}

/// Aggregated DSO forecast for one DA hour. Energies in MWh.
struct HourForecast {
  double generation = 0.0;  // G_t
  double load = 0.0;        // L_t
};

/// Full-day DSO forecast plus capacity limits shared across hours.
struct DsoForecast {
  std::vector<HourForecast> hours;
  double g_cap = 0.0;    // generation capacity per slot, MWh
  double tr_max = 0.0;   // transmission capacity per slot, MWh

  void validate() const {
    if (!(tr_max > 0))
      throw Error(Errc::bad_value, "DsoForecast: tr_max must be > 0");
    if (!(g_cap >= 0))
      throw Error(Errc::bad_value, "DsoForecast: g_cap must be >= 0");
    for (size_t t = 0; t < hours.size(); ++t) {
      const auto& h = hours[t];
      if (!(h.generation >= 0) || h.generation > g_cap + 1e-9)
        throw Error(Errc::bad_value, "DsoForecast: G_t outside [0, g_cap] at hour " +
                                         std::to_string(t));
      if (!(h.load >= 0))
        throw Error(Errc::bad_value,
                    "DsoForecast: L_t must be >= 0 at hour " + std::to_string(t));
    }
  }
};

/// Builds a validated curve from raw (price, quantity) pairs: drops
/// zero-quantity blocks, sorts per side convention (stable), reindexes.
inline BlockCurve build_curve(Side side, int hour,
                              const std::vector<std::pair<double, double>>& raw) {
  BlockCurve c;
  c.side = side;
  c.hour = hour;
  for (const auto& [price, qty] : raw) {
    if (!std::isfinite(price))
      throw Error(Errc::non_finite_price,
                  "curve hour " + std::to_string(hour));
    if (!std::isfinite(qty) || qty < 0)
      throw Error(Errc::bad_value, "block quantity must be finite and >= 0");
    if (qty == 0.0) continue;
    c.blocks.push_back({price, qty, 0});
  }
  if (c.blocks.empty())
    throw Error(Errc::empty_curve, std::string(side_name(side)) + " curve hour " +
                                       std::to_string(hour) +
                                       " empty after filtering");
  if (side == Side::supply) {
    std::stable_sort(c.blocks.begin(), c.blocks.end(),
                     [](const Block& a, const Block& b) { return a.price < b.price; });
  } else {
    std::stable_sort(c.blocks.begin(), c.blocks.end(),
                     [](const Block& a, const Block& b) { return a.price > b.price; });
  }
  for (size_t i = 0; i < c.blocks.size(); ++i)
    c.blocks[i].index = static_cast<int>(i);
  return c;
}

inline bool curves_equal(const BlockCurve& a, const BlockCurve& b) {
  if (a.side != b.side || a.hour != b.hour || a.blocks.size() != b.blocks.size())
    return false;
  for (size_t i = 0; i < a.blocks.size(); ++i)
    if (a.blocks[i].price != b.blocks[i].price ||
        a.blocks[i].quantity != b.blocks[i].quantity ||
        a.blocks[i].index != b.blocks[i].index)
      return false;
  return true;
}

/// Reads per-hour supply/demand curves from a CSV with columns
/// hour,side,price_eur_mwh,quantity_mwh. Returns curves indexed by hour.
struct DayCurves {
  std::vector<BlockCurve> supply;  // indexed by hour
  std::vector<BlockCurve> demand;
};

inline DayCurves load_curves_csv(const std::string& path, int num_hours) {
  CsvTable t = read_csv(path);
  int ch = t.require_column("hour", path);
  int cs = t.require_column("side", path);
  int cp = t.require_column("price_eur_mwh", path);
  int cq = t.require_column("quantity_mwh", path);

  std::vector<std::vector<std::pair<double, double>>> sup(num_hours), dem(num_hours);
  for (const auto& r : t.rows) {
    int hour = static_cast<int>(parse_int(r[ch], path));
    if (hour < 0 || hour >= num_hours)
      throw Error(Errc::bad_value,
                  "hour " + std::to_string(hour) + " out of range in " + path);
    double price = parse_num(r[cp], path);
    double qty = parse_num(r[cq], path);
    if (r[cs] == "supply")
      sup[hour].emplace_back(price, qty);
    else if (r[cs] == "demand")
      dem[hour].emplace_back(price, qty);
    else
      throw Error(Errc::bad_value, "bad side '" + r[cs] + "' in " + path);
  }
  DayCurves out;
  for (int h = 0; h < num_hours; ++h) {
    out.supply.push_back(build_curve(Side::supply, h, sup[h]));
    out.demand.push_back(build_curve(Side::demand, h, dem[h]));
  }
  return out;
}

inline void write_curves_csv(const std::string& path, const DayCurves& curves) {
  CsvWriter w(path, {"hour", "side", "price_eur_mwh", "quantity_mwh"});
  auto dump = [&](const BlockCurve& c) {
    for (const auto& b : c.blocks)
      w.row({fmt_num((long long)c.hour), side_name(c.side), fmt_num(b.price),
             fmt_num(b.quantity)});
  };
  for (size_t h = 0; h < curves.supply.size(); ++h) {
    dump(curves.supply[h]);
    dump(curves.demand[h]);
  }
}

/// Reads the per-hour DSO forecast from a CSV with columns
/// hour,generation_mwh,load_mwh.
inline DsoForecast load_forecast_csv(const std::string& path, int num_hours,
                                     double g_cap, double tr_max) {
  CsvTable t = read_csv(path);
  int ch = t.require_column("hour", path);
  int cg = t.require_column("generation_mwh", path);
  int cl = t.require_column("load_mwh", path);
  DsoForecast f;
  f.g_cap = g_cap;
  f.tr_max = tr_max;
  f.hours.assign(num_hours, {});
  std::vector<bool> seen(num_hours, false);
  for (const auto& r : t.rows) {
    int hour = static_cast<int>(parse_int(r[ch], path));
    if (hour < 0 || hour >= num_hours)
      throw Error(Errc::bad_value, "forecast hour out of range in " + path);
    f.hours[hour] = {parse_num(r[cg], path), parse_num(r[cl], path)};
    seen[hour] = true;
  }
  for (int h = 0; h < num_hours; ++h)
    if (!seen[h])
      throw Error(Errc::bad_value,
                  "forecast missing hour " + std::to_string(h) + " in " + path);
  f.validate();
  return f;
}

}  // namespace dermarket
