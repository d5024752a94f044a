#pragma once

// Experiment driver: one scenario under one strategy, parameter sweeps over
// seeds, and the CSV rows they produce.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mecprice/allocator.hpp"
#include "mecprice/scenario.hpp"

namespace mecprice {

enum class Strategy { Proposed, UniformPricing, NoRecruitment, NoPriority };

inline constexpr Strategy kAllStrategies[] = {Strategy::Proposed, Strategy::UniformPricing,
                                              Strategy::NoRecruitment, Strategy::NoPriority};

/// "proposed", "UP", "NR", "NPPI".
[[nodiscard]] std::string_view strategy_name(Strategy s);
/// Case-insensitive inverse of strategy_name.
[[nodiscard]] std::optional<Strategy> parse_strategy(std::string_view name);

/// Runs a strategy on an already generated scenario.
[[nodiscard]] AllocationOutcome solve(const Scenario& scenario, Strategy strategy);

struct ExperimentResult {
  Strategy strategy = Strategy::Proposed;
  std::size_t n_tds = 0;
  std::size_t n_ads = 0;
  std::uint64_t seed = 0;
  double es_utility = 0.0;
  double mean_td_utility = 0.0;
  double mean_ad_utility = 0.0;  // 0 when there are no ADs
  std::size_t rejections = 0;
  long increments = 0;
  double utilization = 0.0;  // ES compute reserved / F_B
  double wall_time_s = 0.0;

  bool operator==(const ExperimentResult&) const = default;
};

/// Summarizes an outcome into one result row (wall time left at zero).
[[nodiscard]] ExperimentResult summarize(const Scenario& scenario, Strategy strategy,
                                         const AllocationOutcome& outcome);

struct RunOptions {
  bool record_wall_time = false;  // off keeps output byte-reproducible
};

/// generate -> leader prices -> AD recruitment -> allocation for one strategy.
[[nodiscard]] ExperimentResult run_one(const ScenarioConfig& config, Strategy strategy,
                                       const RunOptions& options = {});

enum class SweepAxis { Tds, Ads };

[[nodiscard]] std::optional<SweepAxis> parse_axis(std::string_view name);

struct SweepOptions {
  RunOptions run;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Cartesian product of values x seeds x strategies, in that nesting order.
/// Cells run in parallel; output order does not depend on scheduling.
[[nodiscard]] std::vector<ExperimentResult> sweep(const ScenarioConfig& config_template,
                                                  SweepAxis axis,
                                                  const std::vector<std::size_t>& values,
                                                  const std::vector<std::uint64_t>& seeds,
                                                  const std::vector<Strategy>& strategies,
                                                  const SweepOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "strategy,n_tds,n_ads,seed,es_utility,mean_td_utility,mean_ad_utility,rejections,"
    "increments,utilization,wall_time_s";

void write_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
void emit_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path);
[[nodiscard]] std::vector<ExperimentResult> read_csv(std::istream& in);

}  // namespace mecprice
