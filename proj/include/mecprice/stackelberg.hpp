#pragma once

// Two-stage leader/follower pricing under the sufficient-capacity assumption.
// The follower (TD) answers a per-cycle price with a closed-form offload
// volume; the leader (ES) picks the price by bisection on the sign of its
// marginal utility.

#include <vector>

#include "mecprice/model.hpp"

namespace mecprice {

inline constexpr double kDefaultPriceTolerance = 1e-12;  // $/cycle

struct FollowerContext {
  TdProfile td;
  EconomicParams econ;
  double rate_up = 0.0;  // R_i^B, bits/s
};

struct LeaderContext {
  FollowerContext follower;
  double es_energy = 0.0;    // q_B, J/cycle
  double price_floor = 0.0;  // gamma * q_B
  double price_cap = 0.0;    // price at which the follower stops offloading
  double tolerance = kDefaultPriceTolerance;
};

[[nodiscard]] LeaderContext make_leader_context(const FollowerContext& follower,
                                                double es_energy,
                                                double tolerance = kDefaultPriceTolerance);

/// Stationary point of the follower utility, before projection onto [0, L].
/// Throws DegeneratePricing when the first-order condition has no positive
/// denominator.
[[nodiscard]] double unclamped_best_response(const FollowerContext& ctx, double price);

/// Utility-maximizing offload volume in [0, L] at `price`.
[[nodiscard]] double best_response(const FollowerContext& ctx, double price);

/// Smallest price at which the follower offloads nothing.
[[nodiscard]] double price_cap(const FollowerContext& ctx);

/// The leader's per-TD objective with the unconstrained follower response
/// substituted in: (d - gamma q_B) phi l*(d).
[[nodiscard]] double leader_objective(const LeaderContext& ctx, double price);

/// What the leader actually earns at `price`: the same product evaluated at the
/// clamped best response.
[[nodiscard]] double leader_utility(const LeaderContext& ctx, double price);

/// d/dd of leader_objective.
[[nodiscard]] double leader_marginal_utility(const LeaderContext& ctx, double price);

/// d^2/dd^2 of leader_objective; strictly negative whenever q_B > q_i.
[[nodiscard]] double leader_curvature(const LeaderContext& ctx, double price);

struct PriceSolution {
  double price = 0.0;
  double offload = 0.0;
  bool priced_out = false;  // price_cap <= price_floor; offload is 0
  int iterations = 0;
};

/// Leader price for one TD. Bisects the marginal utility on
/// [price_floor, price_cap] down to `tolerance`; if the derivative keeps one
/// sign the better endpoint is returned. When the interior stationary point
/// asks for more than the whole task, the price is raised to where the
/// follower's clamp stops binding, which is where the realized utility peaks.
[[nodiscard]] PriceSolution solve_price(const LeaderContext& ctx);

/// One TD's sufficient-capacity solution plus the bracket it was solved on.
struct StackelbergSolution {
  double price = 0.0;
  double offload = 0.0;
  double price_floor = 0.0;
  double price_cap = 0.0;
  bool priced_out = false;
};

[[nodiscard]] FollowerContext follower_context(const Market& market, std::size_t td_index);

/// Solves every TD independently.
[[nodiscard]] std::vector<StackelbergSolution> solve_stackelberg(
    const Market& market, double tolerance = kDefaultPriceTolerance);

}  // namespace mecprice
