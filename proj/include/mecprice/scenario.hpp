#pragma once

// Seeded generation of single-cell problem instances and demand calibration.
//
// Fixed radio, energy and capacity values follow the reference simulation
// setup (p_i = 0.1 W, mu0 = 10, N0 = -100 dBm, gamma = 1 $/J, F_B = 10 GHz,
// F_j ~ U[1, 2] GHz, t_max ~ U[0.05, 3] s, L ~ U[10, 20] M). Everything else
// is a default of this library and can be overridden per config.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "mecprice/errors.hpp"
#include "mecprice/model.hpp"
#include "mecprice/stackelberg.hpp"

namespace mecprice {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double at(double u) const { return lo + (hi - lo) * u; }
  bool operator==(const Range&) const = default;
};

enum class TaskSizeUnit { Megabit, Megabyte };

struct ScenarioConfig {
  std::size_t n_tds = 100;
  std::size_t n_ads = 10;
  std::uint64_t seed = 1;

  // Sampled uniformly per entity.
  Range deadline{0.05, 3.0};            // s
  Range task_size{10.0, 20.0};          // in task_size_unit
  TaskSizeUnit task_size_unit = TaskSizeUnit::Megabit;
  Range ad_capacity{1e9, 2e9};          // cycles/s
  Range td_distance{50.0, 200.0};       // m
  Range ad_distance{50.0, 200.0};       // m
  Range satisfaction{1.4e4, 2.8e4};     // $, scaled by calibrate()
  Range complexity{100.0, 500.0};       // cycles/bit
  Range local_energy{0.5e-9, 1.0e-9};   // J/cycle
  Range bid_fraction{1.0, 2.0};         // AD bid as a multiple of gamma * q_B

  // Fixed.
  double td_power = 0.1;        // W
  double fading = 10.0;
  double noise = 1e-13;         // W (-100 dBm)
  double energy_cost = 1.0;     // $/J
  double es_capacity = 1e10;    // cycles/s
  double es_energy = 2e-9;      // J/cycle
  double bs_power = 1.0;        // W
  double bandwidth = 1e7;       // Hz
  double pathloss_exponent = 3.0;
  PathLossConvention pathloss_convention = PathLossConvention::Decaying;
  double completion_value_factor = 1.5;  // v_i as a multiple of the full local cost

  // Solver settings carried with the scenario.
  int increment_steps = 20;
  double price_tolerance = kDefaultPriceTolerance;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  [[nodiscard]] double bits_per_size_unit() const;
  bool operator==(const ScenarioConfig&) const = default;
};

struct Scenario {
  Market market;
  ScenarioConfig config;
};

/// Deterministic per config (including its seed). TDs and ADs draw from
/// separate streams, so changing n_ads leaves the TDs untouched and the first
/// k ADs are shared by every config with n_ads >= k.
[[nodiscard]] Scenario generate(const ScenarioConfig& config);

struct CalibrationOptions {
  std::size_t seeds = 20;
  double band = 0.10;     // accepted |demand / F_B - 1|
  double target = 0.01;   // aimed-for |demand / F_B - 1| once a search is needed
  int max_iterations = 200;
};

/// Calibration could not bring demand into the band; carries the closest config.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, ScenarioConfig best, double best_ratio)
      : std::runtime_error(what), best_config(std::move(best)), ratio(best_ratio) {}
  ScenarioConfig best_config;
  double ratio;
};

/// Mean over `seeds` consecutive seeds (starting at config.seed) of the total
/// sufficient-capacity ES demand divided by F_B, with n_tds = `n_tds`.
[[nodiscard]] double demand_ratio(const ScenarioConfig& config, std::size_t n_tds,
                                  std::size_t seeds = 20);

/// Rescales the satisfaction range so that demand_ratio at `target_n` TDs lies
/// within the band around 1. A config already inside the band is returned
/// unchanged.
[[nodiscard]] ScenarioConfig calibrate(const ScenarioConfig& config, std::size_t target_n,
                                       const CalibrationOptions& options = {});

// --- flat key/value config files -----------------------------------------

/// Reads `key = value` and `key = lo..hi` lines ('#' starts a comment) on top
/// of the defaults. Unknown keys and malformed values are ConfigErrors.
[[nodiscard]] ScenarioConfig parse_config(std::istream& in);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ScenarioConfig& config);
void save_config(const std::filesystem::path& path, const ScenarioConfig& config);

}  // namespace mecprice
