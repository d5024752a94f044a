#pragma once

// Hand-built markets and brute-force oracles shared by the unit suites.
// Nothing here calls the solver code paths it is used to check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "mecprice/model.hpp"

namespace fixtures {

using namespace mecprice;

inline ChannelParams channel() {
  return {1e7, 1e-13, 10.0, 3.0, 1.0, PathLossConvention::Decaying};
}

inline TdProfile td(std::size_t id, double satisfaction, double deadline = 1.0,
                    double distance = 100.0, double complexity = 300.0) {
  TdProfile t;
  t.id = id;
  t.task = {1.5e7, complexity, deadline};
  t.tx_power = 0.1;
  t.satisfaction = satisfaction;
  t.local_energy = 0.8e-9;
  t.distance = distance;
  t.completion_value = 1.5 * t.local_processing_cost({1.0});
  return t;
}

inline AdProfile ad(std::size_t id, double capacity, double bid, double distance = 80.0) {
  return {id, capacity, bid, distance};
}

inline Market market(std::vector<TdProfile> tds, std::vector<AdProfile> ads = {},
                     double es_capacity = 1e10) {
  Market m;
  m.tds = std::move(tds);
  m.ads = std::move(ads);
  m.es = {es_capacity, 2e-9};
  m.channel = channel();
  m.econ = {1.0};
  return m;
}

/// Argmax of f over `points` evenly spaced samples of [lo, hi].
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                          std::size_t points) {
  double best_x = lo;
  double best = f(lo);
  for (std::size_t k = 1; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

inline double grid_max(const std::function<double(double)>& f, double lo, double hi,
                       std::size_t points) {
  return f(grid_argmax(f, lo, hi, points));
}

/// Max over a log-spaced grid of [lo, hi] (lo > 0).
inline double log_grid_max(const std::function<double(double)>& f, double lo, double hi,
                           std::size_t points) {
  double best = f(lo);
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 1; k < points; ++k)
    best = std::max(best, f(lo * std::exp(ratio * static_cast<double>(k) /
                                          static_cast<double>(points - 1))));
  return best;
}

/// Follower utility written out term by term from the model's definitions.
inline double td_utility_direct(const TdProfile& t, double gamma, double price, double l,
                                double rate) {
  const double s = t.satisfaction * std::log(1.0 + l);
  const double e = gamma * t.local_energy * t.task.complexity * (t.task.size - l) +
                   gamma * t.tx_power * l / rate;
  const double o = price * t.task.complexity * l;
  return s + t.completion_value - e - o;
}

/// Random TD over a wide parameter box, including regimes where the
/// follower's clamp binds.
inline TdProfile random_td(std::mt19937_64& rng, std::size_t id) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  auto log_between = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * u(rng));
  };
  TdProfile t;
  t.id = id;
  t.task = {between(1e7, 2e7), between(100.0, 500.0), between(0.05, 3.0)};
  t.tx_power = log_between(0.01, 1.0);
  t.satisfaction = log_between(1e-3, 1e7);
  t.local_energy = between(0.5e-9, 1.0e-9);
  t.distance = between(50.0, 200.0);
  t.completion_value = 1.5 * t.local_processing_cost({1.0});
  return t;
}

}  // namespace fixtures
