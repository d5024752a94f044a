#pragma once

// Capacity-aware pricing and placement. Starting from the per-TD leader
// prices, tasks are placed on the ES in priority order; overflow goes to the
// most profitable AD that can still meet the deadline, and a task that fits
// nowhere has its price raised in fixed steps until its shrinking demand fits
// or the price reaches the TD's cap.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mecprice/auction.hpp"
#include "mecprice/model.hpp"
#include "mecprice/stackelberg.hpp"

namespace mecprice {

struct ResourceLedger {
  double es_remaining = 0.0;         // cycles/s
  std::vector<double> ad_remaining;  // indexed by AD id - 1
};

enum class TdStatus { Local, Delegated, Rejected };

struct AllocationOutcome {
  std::vector<OffloadDecision> decisions;
  std::vector<TdStatus> status;
  std::vector<double> reserved;  // compute reserved for each TD at its location
  std::vector<int> price_increments;
  std::vector<double> ad_rewards;  // empty when no AD was recruited
  ResourceLedger ledger;
  bool capacity_constrained = false;  // false when every TD fit at its leader price

  double es_utility = 0.0;
  std::vector<double> td_utilities;
  std::vector<double> ad_utilities;
  std::vector<double> ad_assigned_cycles;

  [[nodiscard]] std::size_t rejections() const;
  [[nodiscard]] long total_increments() const;
};

struct IncrementPolicy {
  int steps = 20;  // a TD's price reaches its cap after this many increments
};

/// ES utility per unit of ES compute. std::nullopt when nothing is offloaded
/// or the ES cannot meet the deadline.
[[nodiscard]] std::optional<double> task_priority(const TdProfile& td, const EconomicParams& econ,
                                                  double es_energy, double price, double offload,
                                                  double rate_up);

/// ES utility from delegating the task to an AD with the given reward.
[[nodiscard]] double ad_priority(const TdProfile& td, double reward, const EconomicParams& econ,
                                 double bs_power, double price, double offload,
                                 double rate_relay);

/// Sum of f_i^B over all TDs at the given offloads; +inf if any TD cannot
/// meet its deadline on the ES.
[[nodiscard]] double total_es_demand(const Market& market,
                                     std::span<const StackelbergSolution> solutions);

enum class AdSelection { HighestPriority, FirstFit };

/// Knobs of the placement loop. The defaults are the full scheme; the
/// baselines switch individual ingredients off.
struct AssignmentRules {
  bool sort_by_priority = true;
  bool price_increments = true;
  AdSelection ad_selection = AdSelection::HighestPriority;
};

/// Runs the placement loop unconditionally (no sufficient-capacity shortcut).
/// `recruited` is either empty or lists every AD of the market in order.
[[nodiscard]] AllocationOutcome assign_tasks(const Market& market,
                                             std::span<const StackelbergSolution> initial,
                                             std::span<const RecruitedAd> recruited,
                                             const AssignmentRules& rules,
                                             IncrementPolicy policy = {});

/// The full scheme: keeps the leader prices untouched when the ES can serve
/// every TD, otherwise runs the placement loop.
[[nodiscard]] AllocationOutcome allocate(const Market& market,
                                         std::span<const StackelbergSolution> initial,
                                         std::span<const RecruitedAd> recruited,
                                         IncrementPolicy policy = {});

struct ReplayOptions {
  bool enforce_price_bounds = true;  // off for uniform pricing
  double rel_tolerance = 1e-9;
};

/// Re-derives every constraint of the ES and TD problems from the model
/// formulas and returns a description of each violation (empty when feasible).
[[nodiscard]] std::vector<std::string> replay_constraints(const Market& market,
                                                          const AllocationOutcome& outcome,
                                                          const ReplayOptions& options = {});

}  // namespace mecprice
