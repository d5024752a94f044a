#include "mecprice/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mecprice/errors.hpp"

namespace mecprice {

std::optional<double> uniform_price(const Market& market, int grid_points) {
  if (grid_points < 2) throw ContractViolation("uniform price grid needs at least two points");
  const double floor = market.econ.energy_cost * market.es.energy_per_cycle;

  std::vector<FollowerContext> followers;
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < market.tds.size(); ++i) {
    followers.push_back(follower_context(market, i));
    const double cap = price_cap(followers.back());
    if (cap > floor) upper = std::min(upper, cap);
  }
  if (!std::isfinite(upper)) return std::nullopt;

  auto aggregate = [&](double price) {
    double total = 0.0;
    for (const auto& f : followers)
      total += (price - floor) * f.td.task.complexity * best_response(f, price);
    return total;
  };

  double best_price = floor;
  double best_value = aggregate(floor);
  for (int k = 1; k < grid_points; ++k) {
    const double price = floor + (upper - floor) * k / (grid_points - 1);
    const double value = aggregate(price);
    if (value > best_value) {
      best_value = value;
      best_price = price;
    }
  }
  return best_price;
}

AllocationOutcome allocate_uniform_pricing(const Market& market,
                                           std::span<const RecruitedAd> recruited) {
  const auto price = uniform_price(market);
  std::vector<StackelbergSolution> initial;
  initial.reserve(market.tds.size());
  const double floor = market.econ.energy_cost * market.es.energy_per_cycle;
  for (std::size_t i = 0; i < market.tds.size(); ++i) {
    const auto follower = follower_context(market, i);
    const double cap = price_cap(follower);
    StackelbergSolution s;
    s.price_floor = floor;
    s.price_cap = cap;
    if (price && cap > floor) {
      s.price = *price;
      s.offload = best_response(follower, *price);
    } else {
      s.price = cap;
      s.priced_out = true;
    }
    initial.push_back(s);
  }
  AssignmentRules rules;
  rules.price_increments = false;
  return assign_tasks(market, initial, recruited, rules);
}

AllocationOutcome allocate_no_recruitment(const Market& market,
                                          std::span<const StackelbergSolution> initial,
                                          IncrementPolicy policy) {
  return allocate(market, initial, {}, policy);
}

AllocationOutcome allocate_no_priority(const Market& market,
                                       std::span<const StackelbergSolution> initial,
                                       std::span<const RecruitedAd> recruited) {
  AssignmentRules rules;
  rules.sort_by_priority = false;
  rules.price_increments = false;
  rules.ad_selection = AdSelection::FirstFit;
  return assign_tasks(market, initial, recruited, rules);
}

}  // namespace mecprice
