#include "mecprice/verification.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "mecprice/auction.hpp"
#include "mecprice/baselines.hpp"
#include "mecprice/harness.hpp"

namespace mecprice {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kEsEnergy = 2e-9;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) body(k);
  };
  unsigned count = threads ? threads : std::thread::hardware_concurrency();
  count = std::max(1u, std::min<unsigned>(count, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
}

// Follower contexts over a wide box: satisfaction spans ten decades so both
// the interior and the clamped regimes of the best response are exercised.
class ContextSampler {
 public:
  explicit ContextSampler(std::uint64_t seed) : rng_(seed) {}

  FollowerContext follower() {
    TdProfile t;
    t.task = {between(1e7, 2e7), between(100.0, 500.0), between(0.05, 3.0)};
    t.tx_power = log_between(0.01, 1.0);
    t.satisfaction = log_between(1e-3, 1e7);
    t.local_energy = between(0.5e-9, 1.0e-9);
    t.distance = between(50.0, 200.0);
    const EconomicParams econ{between(0.5, 1.5)};
    t.completion_value = 1.5 * t.local_processing_cost(econ);
    return {t, econ, log_between(1e6, 1e9)};
  }

  // A leader context with a non-empty price bracket.
  LeaderContext leader(double tolerance = kDefaultPriceTolerance) {
    for (;;) {
      const auto ctx = make_leader_context(follower(), kEsEnergy, tolerance);
      if (ctx.price_cap > ctx.price_floor) return ctx;
    }
  }

  double unit() { return u_(rng_); }
  double between(double lo, double hi) { return lo + (hi - lo) * unit(); }
  double log_between(double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * unit());
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> u_{0.0, 1.0};
};

ScenarioConfig scenario_config(std::size_t n, std::size_t m, std::uint64_t seed) {
  ScenarioConfig c;
  c.n_tds = n;
  c.n_ads = m;
  c.seed = seed;
  return c;
}

bool same_decisions(const AllocationOutcome& a, const AllocationOutcome& b) {
  if (a.decisions.size() != b.decisions.size()) return false;
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    const auto &x = a.decisions[i], &y = b.decisions[i];
    if (x.price != y.price || x.offload != y.offload || x.location != y.location) return false;
  }
  return true;
}

// --- criteria ------------------------------------------------------------

CriterionResult follower_optimality(const AcceptanceOptions& o) {
  CriterionResult r;
  const int draws = o.quick ? 100 : 1000;
  constexpr int kGrid = 100000;
  std::vector<double> worst(draws, 0.0);
  parallel_for(draws, o.threads, [&](std::size_t k) {
    ContextSampler s(1000 + k);
    const auto ctx = s.leader();
    const auto& f = ctx.follower;
    const double price = s.between(ctx.price_floor, ctx.price_cap);
    const double size = f.td.task.size;
    const double step = size / (kGrid - 1);
    double best_l = 0.0;
    double best_u = td_utility(f.td, f.econ, {price, 0.0, kEdgeServer}, f.rate_up);
    for (int g = 1; g < kGrid; ++g) {
      const double l = size * g / (kGrid - 1);
      const double u = td_utility(f.td, f.econ, {price, l, kEdgeServer}, f.rate_up);
      if (u > best_u) {
        best_u = u;
        best_l = l;
      }
    }
    worst[k] = std::abs(best_response(f, price) - best_l) / step;
  });
  const double max_steps = *std::max_element(worst.begin(), worst.end());
  r.passed = max_steps <= 1.0;
  r.detail = fmt("%d draws, worst |l* - grid argmax| = %.3g grid steps (limit 1)", draws, max_steps);
  return r;
}

CriterionResult leader_optimality(const AcceptanceOptions& o) {
  CriterionResult r;
  const int draws = o.quick ? 50 : 200;
  constexpr int kGrid = 10000;
  std::vector<double> shortfall(draws, 0.0);
  parallel_for(draws, o.threads, [&](std::size_t k) {
    ContextSampler s(2000 + k);
    const auto ctx = s.leader();
    const auto sol = solve_price(ctx);
    double best = leader_utility(ctx, ctx.price_floor);
    for (int g = 1; g < kGrid; ++g)
      best = std::max(best, leader_utility(ctx, ctx.price_floor + (ctx.price_cap - ctx.price_floor) *
                                                                      g / (kGrid - 1)));
    const double got = leader_utility(ctx, sol.price);
    shortfall[k] = best > 0.0 ? (best - got) / best : 0.0;
  });
  const double worst = *std::max_element(shortfall.begin(), shortfall.end());
  r.passed = worst <= 1e-6;
  r.detail = fmt("%d draws, worst shortfall vs grid max = %.3g relative (limit 1e-6)", draws, worst);
  return r;
}

CriterionResult derivative_fidelity(const AcceptanceOptions& o) {
  CriterionResult r;
  const int draws = o.quick ? 200 : 1000;
  ContextSampler s(3000);
  double worst = 0.0;
  int non_negative = 0;
  for (int k = 0; k < draws; ++k) {
    const auto ctx = s.leader();
    const double span = ctx.price_cap - ctx.price_floor;
    const double d = ctx.price_floor + span * s.between(0.01, 0.99);
    const double h = 1e-6 * span;
    const double fd = (leader_objective(ctx, d + h) - leader_objective(ctx, d - h)) / (2.0 * h);
    const double scale =
        ctx.follower.td.task.complexity * (1.0 + unclamped_best_response(ctx.follower, d));
    worst = std::max(worst, std::abs(leader_marginal_utility(ctx, d) - fd) / scale);
    if (!(leader_curvature(ctx, d) < 0.0)) ++non_negative;
  }
  r.passed = worst < 1e-4 && non_negative == 0;
  r.detail = fmt("%d draws, worst first-derivative error %.3g (limit 1e-4), %d non-negative curvatures",
                 draws, worst, non_negative);
  return r;
}

CriterionResult cap_identity(const AcceptanceOptions& o) {
  CriterionResult r;
  const int draws = o.quick ? 200 : 1000;
  ContextSampler s(4000);
  double worst = 0.0;
  int nonzero = 0;
  for (int k = 0; k < draws; ++k) {
    const auto f = s.leader().follower;
    const double cap = price_cap(f);
    worst = std::max(worst, std::abs(unclamped_best_response(f, cap)));
    if (best_response(f, cap) != 0.0 && unclamped_best_response(f, cap) > 1e-9) ++nonzero;
  }
  r.passed = worst <= 1e-9 && nonzero == 0;
  r.detail = fmt("%d draws, worst |pre-clamp l*(cap)| = %.3g bits (limit 1e-9)", draws, worst);
  return r;
}

struct ScenarioRun {
  Scenario scenario;
  std::vector<RecruitedAd> recruited;
  AllocationOutcome outcome[4];
};

std::vector<ScenarioRun> run_scenarios(const std::vector<ScenarioConfig>& configs, unsigned threads) {
  std::vector<ScenarioRun> runs(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t k) {
    auto& run = runs[k];
    run.scenario = generate(configs[k]);
    run.recruited = vickrey_rewards(run.scenario.market.ads);
    for (std::size_t s = 0; s < 4; ++s) run.outcome[s] = solve(run.scenario, kAllStrategies[s]);
  });
  return runs;
}

// 100 scenarios cycling the (N, M) grid of the constraint check.
std::vector<ScenarioConfig> constraint_configs(bool quick) {
  const std::size_t ns[] = {100, 130, 160};
  const std::size_t ms[] = {0, 10, 30};
  std::vector<ScenarioConfig> out;
  const std::uint64_t count = quick ? 18 : 100;
  for (std::uint64_t seed = 1; seed <= count; ++seed) {
    const std::size_t cell = (seed - 1) % 9;
    out.push_back(scenario_config(ns[cell / 3], ms[cell % 3], seed));
  }
  return out;
}

CriterionResult constraint_satisfaction(const std::vector<ScenarioRun>& runs) {
  CriterionResult r;
  std::size_t failures = 0;
  std::string first;
  for (const auto& run : runs) {
    for (std::size_t s = 0; s < 4; ++s) {
      ReplayOptions replay;
      replay.enforce_price_bounds = kAllStrategies[s] != Strategy::UniformPricing;
      const auto issues = replay_constraints(run.scenario.market, run.outcome[s], replay);
      if (!issues.empty()) {
        ++failures;
        if (first.empty())
          first = fmt(" (first: %s N=%zu M=%zu seed=%llu: ",
                      std::string(strategy_name(kAllStrategies[s])).c_str(), run.scenario.config.n_tds,
                      run.scenario.config.n_ads,
                      static_cast<unsigned long long>(run.scenario.config.seed)) +
                  issues.front() + ")";
      }
    }
  }
  r.passed = failures == 0;
  r.detail = fmt("%zu scenarios x 4 strategies replayed, %zu infeasible outcomes", runs.size(),
                 failures) +
             first;
  return r;
}

CriterionResult dominance(const AcceptanceOptions& o) {
  CriterionResult r;
  const std::size_t seeds = 20;
  std::vector<ScenarioConfig> configs;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) configs.push_back(scenario_config(160, 30, seed));
  const auto runs = run_scenarios(configs, o.threads);
  double mean[4] = {};
  for (const auto& run : runs)
    for (std::size_t s = 0; s < 4; ++s) mean[s] += run.outcome[s].es_utility / seeds;
  const double p = mean[0], up = mean[1], nr = mean[2], nppi = mean[3];
  const double tol = 1e-9 * std::abs(p);
  r.passed = p > up && p > nr && p >= nppi - tol;
  r.detail = fmt("mean U_B proposed %.10g, UP %.10g, NR %.10g, NPPI %.10g; proposed/UP = %.6f",
                 p, up, nr, nppi, p / up);
  return r;
}

CriterionResult inflection(const AcceptanceOptions& o) {
  CriterionResult r;
  const auto calibrated = calibrate(ScenarioConfig{}, 100);
  const std::size_t seeds = 20;
  auto mean_ad = [&](std::size_t n, std::size_t& active) {
    std::vector<double> per_seed(seeds, 0.0);
    parallel_for(seeds, o.threads, [&](std::size_t k) {
      ScenarioConfig c = calibrated;
      c.n_tds = n;
      c.seed = k + 1;
      per_seed[k] = run_one(c, Strategy::Proposed).mean_ad_utility;
    });
    active = static_cast<std::size_t>(
        std::count_if(per_seed.begin(), per_seed.end(), [](double u) { return u > 0.0; }));
    return std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / seeds;
  };
  std::size_t active_80 = 0, active_140 = 0;
  const double low = mean_ad(80, active_80);
  const double high = mean_ad(140, active_140);
  r.passed = low == 0.0 && high > 0.0;
  r.detail = fmt("mean AD utility N=80: %.4g (%zu/%zu seeds > 0), N=140: %.4g (%zu/%zu seeds > 0)",
                 low, active_80, seeds, high, active_140, seeds);
  return r;
}

CriterionResult nr_flatness(const AcceptanceOptions& o) {
  CriterionResult r;
  const std::uint64_t seeds = o.quick ? 5 : 20;
  const std::size_t ms[] = {0, 10, 20, 30};
  std::vector<ScenarioConfig> configs;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed)
    for (const auto m : ms) configs.push_back(scenario_config(160, m, seed));
  std::vector<double> u(configs.size());
  parallel_for(configs.size(), o.threads,
               [&](std::size_t k) { u[k] = run_one(configs[k], Strategy::NoRecruitment).es_utility; });
  std::size_t differing = 0;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u[k] != u[k - k % 4]) ++differing;
  r.passed = differing == 0;
  r.detail = fmt("N=160, %llu seeds x M in {0,10,20,30}: %zu rows differ from M=0",
                 static_cast<unsigned long long>(seeds), differing);
  return r;
}

CriterionResult underload_equivalence(const AcceptanceOptions& o) {
  CriterionResult r;
  const std::uint64_t seeds = o.quick ? 5 : 20;
  std::vector<ScenarioConfig> configs;
  for (const std::size_t n : {40u, 60u, 80u})
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) configs.push_back(scenario_config(n, 10, seed));
  const auto runs = run_scenarios(configs, o.threads);
  std::size_t underloaded = 0, mismatched = 0;
  for (const auto& run : runs) {
    const auto& m = run.scenario.market;
    if (total_es_demand(m, solve_stackelberg(m)) > m.es.capacity) continue;
    ++underloaded;
    const auto& p = run.outcome[0];
    bool ok = same_decisions(p, run.outcome[2]) && same_decisions(p, run.outcome[3]);
    for (const auto& d : p.decisions) ok = ok && d.location == kEdgeServer;
    if (!ok) ++mismatched;
  }
  r.passed = underloaded > 0 && mismatched == 0;
  r.detail = fmt("%zu of %zu scenarios underloaded, %zu with differing proposed/NR/NPPI outcomes",
                 underloaded, runs.size(), mismatched);
  return r;
}

CriterionResult auction_rationality(const std::vector<ScenarioRun>& runs) {
  CriterionResult r;
  std::size_t ads = 0, below_bid = 0, negative = 0;
  for (const auto& run : runs) {
    for (const auto& rec : run.recruited) {
      ++ads;
      if (rec.reward < rec.ad.bid) ++below_bid;
    }
    for (const auto& outcome : run.outcome)
      for (const double u : outcome.ad_utilities)
        if (u < 0.0) ++negative;
  }
  r.passed = below_bid == 0 && negative == 0;
  r.detail = fmt("%zu recruited ADs over %zu scenarios: %zu rewards below bid, %zu negative AD utilities",
                 ads, runs.size(), below_bid, negative);
  return r;
}

CriterionResult determinism(const AcceptanceOptions& o) {
  CriterionResult r;
  const std::uint64_t seed_count = o.quick ? 2 : 5;
  std::vector<std::uint64_t> seeds(seed_count);
  std::iota(seeds.begin(), seeds.end(), 1);
  const std::vector<Strategy> all(std::begin(kAllStrategies), std::end(kAllStrategies));
  const std::vector<std::size_t> values{100, 130, 160};
  auto csv = [&](unsigned threads) {
    std::ostringstream out;
    write_csv(out, sweep(scenario_config(0, 10, 1), SweepAxis::Tds, values, seeds, all, {{}, threads}));
    return out.str();
  };
  const auto first = csv(o.threads);
  const auto second = csv(1);
  r.passed = first == second;
  r.detail = fmt("%zu-row sweep run twice (parallel and serial): %s", values.size() * seed_count * 4,
                 first == second ? "byte-identical CSV" : "CSV differs");
  return r;
}

CriterionResult scaling(const AcceptanceOptions& o) {
  CriterionResult r;
  const int repeats = o.quick ? 3 : 9;
  auto median_time = [&](std::size_t n) {
    const auto s = generate(scenario_config(n, 30, 1));
    std::vector<double> t;
    for (int k = 0; k < repeats; ++k) {
      const auto start = Clock::now();
      const auto outcome = solve(s, Strategy::Proposed);
      t.push_back(seconds_since(start));
      if (outcome.decisions.size() != n) t.back() = 1e9;
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
  };
  const double small = median_time(160);
  const double large = median_time(640);
  const double ratio = large / small;
  r.passed = small < 1.0 && ratio < 16.0;
  r.detail = fmt("N=160, M=30: %.3g ms; N=640: %.3g ms; ratio %.2f (limits 1 s, 16x)",
                 1e3 * small, 1e3 * large, ratio);
  return r;
}

}  // namespace

std::string format_result(const CriterionResult& result) {
  return fmt("[%s] %d %s: ", result.passed ? "PASS" : "FAIL", result.id, result.name.c_str()) +
         result.detail + fmt(" (%.2f s)", result.seconds);
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> results;
  auto record = [&](int id, const char* name, double limit, auto check) {
    const auto start = Clock::now();
    CriterionResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.id = id;
    r.name = name;
    r.seconds = seconds_since(start);
    if (r.seconds >= limit) {
      r.passed = false;
      r.detail += fmt("; took %.1f s (limit %g s)", r.seconds, limit);
    }
    results.push_back(r);
    if (options.on_result) options.on_result(results.back());
  };
  constexpr double kNoLimit = 1e300;

  record(1, "follower optimality", 30.0, [&] { return follower_optimality(options); });
  record(2, "leader optimality", 30.0, [&] { return leader_optimality(options); });
  record(3, "derivative fidelity", kNoLimit, [&] { return derivative_fidelity(options); });
  record(4, "price-cap identity", kNoLimit, [&] { return cap_identity(options); });

  // Criteria 5 and 10 share one batch of scenario runs.
  std::vector<ScenarioRun> runs;
  record(5, "constraint satisfaction", 60.0, [&] {
    runs = run_scenarios(constraint_configs(options.quick), options.threads);
    return constraint_satisfaction(runs);
  });
  record(6, "dominance at N=160, M=30", kNoLimit, [&] { return dominance(options); });
  record(7, "inflection of AD utility", kNoLimit, [&] { return inflection(options); });
  record(8, "NR flat in M", kNoLimit, [&] { return nr_flatness(options); });
  record(9, "underload equivalence", kNoLimit, [&] { return underload_equivalence(options); });
  record(10, "auction rationality", kNoLimit, [&] {
    if (runs.empty()) throw std::runtime_error("no scenario runs to inspect");
    return auction_rationality(runs);
  });
  record(11, "determinism", kNoLimit, [&] { return determinism(options); });
  record(12, "scaling", kNoLimit, [&] { return scaling(options); });
  return results;
}

}  // namespace mecprice
