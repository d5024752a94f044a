#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mecprice/errors.hpp"
#include "mecprice/stackelberg.hpp"

using namespace mecprice;
using doctest::Approx;

namespace {

FollowerContext worked_follower() {
  TdProfile t;
  t.task = {1e7, 100.0, 1.0};
  t.tx_power = 0.1;
  t.satisfaction = 1.0;
  t.local_energy = 1e-9;
  t.completion_value = 2.0;
  t.distance = 100.0;
  return {t, {1.0}, 1e6};
}

FollowerContext random_follower(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t = fixtures::random_td(rng, 0);
  const double rate = std::exp(std::log(1e6) + std::log(1e3) * u(rng));
  return {t, {0.5 + u(rng)}, rate};
}

}  // namespace

TEST_CASE("best response worked example") {
  const auto ctx = worked_follower();
  CHECK(best_response(ctx, 1e-6) == Approx(9999.0).epsilon(1e-12));
  CHECK(best_response(ctx, 0.01) == 0.0);
  auto eager = ctx;
  eager.td.satisfaction = 2.0;
  CHECK(unclamped_best_response(eager, 1e-9 + 1e-12) > eager.td.task.size);
  CHECK(best_response(eager, 1e-9 + 1e-12) == eager.td.task.size);

  SUBCASE("line search on the follower utility agrees") {
    const auto& t = ctx.td;
    auto f = [&](double l) { return fixtures::td_utility_direct(t, 1.0, 1e-6, l, ctx.rate_up); };
    // 1e6 points over [0, L] resolve l to 10 bits; refine on a fine grid around the winner.
    const double coarse = fixtures::grid_argmax(f, 0.0, t.task.size, 1000001);
    const double fine = fixtures::grid_argmax(f, std::max(0.0, coarse - 20.0), coarse + 20.0, 40001);
    CHECK(fine == Approx(9999.0).epsilon(1e-4));
  }
}

TEST_CASE("degenerate denominator is an error") {
  auto ctx = worked_follower();
  ctx.td.tx_power = 0.0;
  CHECK_THROWS_AS((void)best_response(ctx, ctx.td.local_energy), DegeneratePricing);
  CHECK_THROWS_AS((void)best_response(ctx, 0.0), DegeneratePricing);
}

TEST_CASE("price cap") {
  const auto ctx = worked_follower();
  CHECK(price_cap(ctx) == Approx(0.01).epsilon(1e-14));
  CHECK(unclamped_best_response(ctx, price_cap(ctx)) == Approx(0.0).epsilon(1e-9));

  auto silent = ctx;
  silent.td.tx_power = 0.0;
  CHECK(price_cap(silent) == Approx(1.0 / 100.0 + 1e-9).epsilon(1e-15));

  SUBCASE("cap zeroes the response on random contexts") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 1000; ++k) {
      const auto c = random_follower(rng);
      const double cap = price_cap(c);
      if (!(cap > c.econ.energy_cost * c.td.local_energy)) continue;
      CHECK(std::abs(unclamped_best_response(c, cap)) < 1e-6);
      CHECK(best_response(c, cap) == Approx(0.0).epsilon(1e-6));
      CHECK(best_response(c, cap * 1.5) == 0.0);
    }
  }
}

TEST_CASE("best response decreases in price") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const auto c = random_follower(rng);
    const double floor = 2e-9 * c.econ.energy_cost;
    const double cap = price_cap(c);
    if (!(cap > floor)) continue;
    const double d1 = floor + (cap - floor) * u(rng);
    const double d2 = d1 + (cap - d1) * u(rng) * 0.5;
    const double l1 = best_response(c, d1), l2 = best_response(c, d2);
    CHECK(l2 <= l1);
    if (l1 > 0.0 && l1 < c.td.task.size && d2 > d1 * (1 + 1e-9)) CHECK(l2 < l1);
  }
}

TEST_CASE("leader marginal utility") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    const auto follower = random_follower(rng);
    const auto ctx = make_leader_context(follower, 2e-9);
    if (!(ctx.price_cap > ctx.price_floor)) continue;
    ++checked;
    const double span = ctx.price_cap - ctx.price_floor;
    const double d = ctx.price_floor + span * (0.01 + 0.98 * u(rng));
    const double h = 1e-6 * span;
    const double fd =
        (leader_objective(ctx, d + h) - leader_objective(ctx, d - h)) / (2.0 * h);
    const double phi = follower.td.task.complexity;
    const double scale = phi * (1.0 + unclamped_best_response(follower, d));
    CHECK(std::abs(leader_marginal_utility(ctx, d) - fd) / scale < 1e-4);

    if (best_response(follower, ctx.price_floor) > 0.0)
      CHECK(leader_marginal_utility(ctx, ctx.price_floor) > 0.0);

    const double d2 = d + (ctx.price_cap - d) * u(rng);
    if (d2 > d) CHECK(leader_marginal_utility(ctx, d2) < leader_marginal_utility(ctx, d));
    CHECK(leader_curvature(ctx, d) < 0.0);
  }
}

TEST_CASE("leader objective is midpoint concave") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const auto ctx = make_leader_context(random_follower(rng), 2e-9);
    if (!(ctx.price_cap > ctx.price_floor)) continue;
    const double span = ctx.price_cap - ctx.price_floor;
    const double a = ctx.price_floor + span * u(rng);
    const double b = ctx.price_floor + span * u(rng);
    const double mid = leader_objective(ctx, 0.5 * (a + b));
    const double chord = 0.5 * (leader_objective(ctx, a) + leader_objective(ctx, b));
    CHECK(mid >= chord - 1e-12 * (std::abs(mid) + std::abs(chord)));
  }
}

TEST_CASE("solve_price matches a grid search") {
  std::mt19937_64 rng(37);
  int solved = 0;
  while (solved < 200) {
    const auto ctx = make_leader_context(random_follower(rng), 2e-9);
    if (!(ctx.price_cap > ctx.price_floor)) continue;
    ++solved;
    const auto sol = solve_price(ctx);
    REQUIRE_FALSE(sol.priced_out);
    CHECK(sol.price >= ctx.price_floor);
    CHECK(sol.price <= ctx.price_cap);
    CHECK(sol.offload == best_response(ctx.follower, sol.price));
    auto f = [&](double d) { return leader_utility(ctx, d); };
    const double best = fixtures::grid_max(f, ctx.price_floor, ctx.price_cap, 10000);
    CHECK(leader_utility(ctx, sol.price) >= best - 1e-6 * std::abs(best));
  }
}

TEST_CASE("solve_price stationarity and refinement") {
  std::mt19937_64 rng(41);
  int solved = 0;
  while (solved < 200) {
    const auto follower = random_follower(rng);
    const auto coarse = make_leader_context(follower, 2e-9, 1e-10);
    if (!(coarse.price_cap > coarse.price_floor)) continue;
    ++solved;
    const auto fine = make_leader_context(follower, 2e-9, 1e-13);
    const auto a = solve_price(coarse);
    const auto b = solve_price(fine);
    // Both land within their own tolerance of the true argmax.
    CHECK(std::abs(a.price - b.price) <= 2.0 * coarse.tolerance + 1e-15);
  }
}

TEST_CASE("bisection iteration bound") {
  // Each step halves the bracket, so the count is bounded by log2(range / tolerance).
  auto follower = worked_follower();
  follower.td.task.size = 1e12;  // keep the clamp out of the way
  auto ctx = make_leader_context(follower, 2e-9, 1e-12);
  const auto sol = solve_price(ctx);
  const int bound =
      static_cast<int>(std::ceil(std::log2((ctx.price_cap - ctx.price_floor) / ctx.tolerance)));
  CHECK(sol.iterations <= bound);
  CHECK(std::abs(leader_marginal_utility(ctx, sol.price)) <
        1e-6 * follower.td.task.complexity * (1.0 + sol.offload));
}

TEST_CASE("priced-out TD") {
  auto follower = worked_follower();
  follower.td.satisfaction = 1e-8;  // cap ~ 1e-10 + q - small < q_B
  const auto ctx = make_leader_context(follower, 2e-9);
  REQUIRE(ctx.price_cap <= ctx.price_floor);
  const auto sol = solve_price(ctx);
  CHECK(sol.priced_out);
  CHECK(sol.price == ctx.price_cap);
  CHECK(sol.offload == 0.0);
}

TEST_CASE("clamped optimum sits at the kink") {
  // With huge satisfaction the interior stationary point demands more than the task.
  auto follower = worked_follower();
  follower.td.satisfaction = 1e6;
  follower.td.task.size = 1e5;
  const auto ctx = make_leader_context(follower, 2e-9);
  const auto sol = solve_price(ctx);
  CHECK(sol.offload == Approx(follower.td.task.size).epsilon(1e-9));
  // Just above the solution the follower stops taking the whole task.
  CHECK(unclamped_best_response(follower, sol.price * (1 + 1e-6)) < follower.td.task.size);
  auto f = [&](double d) { return leader_utility(ctx, d); };
  const double best = fixtures::grid_max(f, ctx.price_floor, ctx.price_cap, 100000);
  CHECK(leader_utility(ctx, sol.price) >= best * (1 - 1e-9));
}

TEST_CASE("solve_stackelberg over a market") {
  auto m = fixtures::market({fixtures::td(0, 1e4), fixtures::td(1, 2e4, 2.0, 150.0),
                             fixtures::td(2, 1e-8)});
  const auto sols = solve_stackelberg(m);
  REQUIRE(sols.size() == 3);
  for (std::size_t i = 0; i < sols.size(); ++i) {
    CHECK(sols[i].price_floor == Approx(2e-9));
    const auto ctx = follower_context(m, i);
    CHECK(sols[i].price_cap == price_cap(ctx));
    if (!sols[i].priced_out) CHECK(sols[i].offload == best_response(ctx, sols[i].price));
  }
  CHECK_FALSE(sols[0].priced_out);
  CHECK(sols[2].priced_out);
  CHECK(sols[2].offload == 0.0);
}
