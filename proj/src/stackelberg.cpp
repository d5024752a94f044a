#include "mecprice/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mecprice/errors.hpp"

namespace mecprice {

namespace {

constexpr int kMaxBisectionSteps = 2000;

// gamma p + d phi R - gamma q phi R, the follower's first-order denominator.
double response_denominator(const FollowerContext& ctx, double price) {
  const auto& td = ctx.td;
  const double gamma = ctx.econ.energy_cost;
  const double phi_r = td.task.complexity * ctx.rate_up;
  return gamma * td.tx_power + phi_r * (price - gamma * td.local_energy);
}

double checked_denominator(const FollowerContext& ctx, double price) {
  const double denom = response_denominator(ctx, price);
  if (!(denom > 0.0))
    throw DegeneratePricing("non-positive best-response denominator for TD " +
                            std::to_string(ctx.td.id));
  return denom;
}

// Price at which the unclamped response equals the whole task.
double full_offload_price(const FollowerContext& ctx) {
  const auto& td = ctx.td;
  const double gamma = ctx.econ.energy_cost;
  const double phi_r = td.task.complexity * ctx.rate_up;
  const double target = td.satisfaction * ctx.rate_up / (td.task.size + 1.0);
  return gamma * td.local_energy + (target - gamma * td.tx_power) / phi_r;
}

}  // namespace

LeaderContext make_leader_context(const FollowerContext& follower, double es_energy,
                                  double tolerance) {
  if (!(follower.rate_up > 0.0)) throw InfeasibleLink("follower uplink rate is zero");
  if (!(tolerance > 0.0)) throw DomainError("price tolerance must be positive");
  LeaderContext ctx;
  ctx.follower = follower;
  ctx.es_energy = es_energy;
  ctx.price_floor = follower.econ.energy_cost * es_energy;
  ctx.price_cap = price_cap(follower);
  ctx.tolerance = tolerance;
  return ctx;
}

double unclamped_best_response(const FollowerContext& ctx, double price) {
  const double denom = checked_denominator(ctx, price);
  return ctx.td.satisfaction * ctx.rate_up / denom - 1.0;
}

double best_response(const FollowerContext& ctx, double price) {
  return std::clamp(unclamped_best_response(ctx, price), 0.0, ctx.td.task.size);
}

double price_cap(const FollowerContext& ctx) {
  const auto& td = ctx.td;
  const double phi = td.task.complexity;
  return td.satisfaction / phi +
         ctx.econ.energy_cost * (td.local_energy - td.tx_power / (phi * ctx.rate_up));
}

double leader_objective(const LeaderContext& ctx, double price) {
  const double phi = ctx.follower.td.task.complexity;
  return (price - ctx.price_floor) * phi * unclamped_best_response(ctx.follower, price);
}

double leader_utility(const LeaderContext& ctx, double price) {
  const double phi = ctx.follower.td.task.complexity;
  return (price - ctx.price_floor) * phi * best_response(ctx.follower, price);
}

double leader_marginal_utility(const LeaderContext& ctx, double price) {
  const auto& td = ctx.follower.td;
  const double phi = td.task.complexity;
  const double rate = ctx.follower.rate_up;
  const double denom = checked_denominator(ctx.follower, price);
  const double offload = td.satisfaction * rate / denom - 1.0;
  return phi * offload -
         (price - ctx.price_floor) * phi * td.satisfaction * phi * rate * rate / (denom * denom);
}

double leader_curvature(const LeaderContext& ctx, double price) {
  const auto& td = ctx.follower.td;
  const double phi = td.task.complexity;
  const double rate = ctx.follower.rate_up;
  const double gamma = ctx.follower.econ.energy_cost;
  const double denom = checked_denominator(ctx.follower, price);
  const double bracket =
      gamma * phi * rate * (ctx.es_energy - td.local_energy) + gamma * td.tx_power;
  return -2.0 * td.satisfaction * phi * phi * rate * rate * bracket / (denom * denom * denom);
}

PriceSolution solve_price(const LeaderContext& ctx) {
  PriceSolution out;
  if (!(ctx.price_cap > ctx.price_floor)) {
    out.price = ctx.price_cap;
    out.priced_out = true;
    return out;
  }

  double lo = ctx.price_floor;
  double hi = ctx.price_cap;
  const double slope_lo = leader_marginal_utility(ctx, lo);
  const double slope_hi = leader_marginal_utility(ctx, hi);

  double price = 0.0;
  if (slope_lo <= 0.0 || slope_hi >= 0.0) {
    price = leader_utility(ctx, hi) > leader_utility(ctx, lo) ? hi : lo;
  } else {
    while (hi - lo > ctx.tolerance && out.iterations < kMaxBisectionSteps) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;  // bracket is one ulp wide
      ++out.iterations;
      if (leader_marginal_utility(ctx, mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    price = 0.5 * (lo + hi);
    if (unclamped_best_response(ctx.follower, price) > ctx.follower.td.task.size)
      price = std::min(std::max(price, full_offload_price(ctx.follower)), ctx.price_cap);
  }

  out.price = price;
  out.offload = best_response(ctx.follower, price);
  return out;
}

FollowerContext follower_context(const Market& market, std::size_t td_index) {
  return FollowerContext{market.tds.at(td_index), market.econ, market.uplink_rate(td_index)};
}

std::vector<StackelbergSolution> solve_stackelberg(const Market& market, double tolerance) {
  std::vector<StackelbergSolution> out;
  out.reserve(market.tds.size());
  for (std::size_t i = 0; i < market.tds.size(); ++i) {
    const auto ctx =
        make_leader_context(follower_context(market, i), market.es.energy_per_cycle, tolerance);
    const auto sol = solve_price(ctx);
    out.push_back({sol.price, sol.offload, ctx.price_floor, ctx.price_cap, sol.priced_out});
  }
  return out;
}

}  // namespace mecprice
