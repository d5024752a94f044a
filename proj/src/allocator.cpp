#include "mecprice/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mecprice/errors.hpp"

namespace mecprice {

namespace {

void check_inputs(const Market& market, std::span<const StackelbergSolution> initial,
                  std::span<const RecruitedAd> recruited, IncrementPolicy policy) {
  if (initial.size() != market.tds.size())
    throw ContractViolation("one initial price per TD is required");
  if (policy.steps < 1) throw ContractViolation("increment steps must be >= 1");
  if (recruited.empty()) return;
  if (recruited.size() != market.ads.size())
    throw ContractViolation("recruitment must cover every AD or none");
  for (std::size_t j = 0; j < recruited.size(); ++j) {
    if (recruited[j].ad.id != market.ads[j].id)
      throw ContractViolation("recruited AD order does not match the market");
    if (recruited[j].reward < recruited[j].ad.bid)
      throw ContractViolation("AD reward below its bid");
  }
}

AllocationOutcome blank_outcome(const Market& market, std::span<const RecruitedAd> recruited) {
  const std::size_t n = market.tds.size();
  AllocationOutcome out;
  out.decisions.resize(n);
  out.status.assign(n, TdStatus::Local);
  out.reserved.assign(n, 0.0);
  out.price_increments.assign(n, 0);
  out.ad_rewards = rewards_of(recruited);
  out.ledger.es_remaining = market.es.capacity;
  for (const auto& ad : market.ads)
    out.ledger.ad_remaining.push_back(recruited.empty() ? 0.0 : ad.capacity);
  return out;
}

// Fills the utility ledgers from the decisions.
void settle(const Market& market, AllocationOutcome& out) {
  const std::size_t n = market.tds.size();
  const std::size_t m = market.ads.size();
  out.td_utilities.assign(n, 0.0);
  out.ad_assigned_cycles.assign(m, 0.0);
  out.ad_utilities.assign(m, 0.0);
  out.es_utility = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& td = market.tds[i];
    const auto& d = out.decisions[i];
    const double rate_up = market.uplink_rate(i);
    out.td_utilities[i] = td_utility(td, market.econ, d, rate_up);
    if (d.location == kEdgeServer) {
      out.es_utility += es_local_utility(d.price, market.es.energy_per_cycle,
                                         market.econ.energy_cost, td.task.complexity, d.offload);
    } else {
      const std::size_t j = d.location - 1;
      out.es_utility += ad_priority(td, out.ad_rewards[j], market.econ, market.channel.bs_power,
                                    d.price, d.offload, market.relay_rate(j));
      out.ad_assigned_cycles[j] += td.task.complexity * d.offload;
    }
  }
  for (std::size_t j = 0; j < m && !out.ad_rewards.empty(); ++j)
    out.ad_utilities[j] =
        ad_utility(out.ad_rewards[j], market.ads[j].bid, out.ad_assigned_cycles[j]);
}

// Priority order: defined priorities descending, then tasks without one;
// ties by ascending TD id.
std::vector<std::size_t> service_order(const Market& market,
                                       std::span<const StackelbergSolution> initial,
                                       bool sort_by_priority) {
  const std::size_t n = market.tds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!sort_by_priority) return order;

  std::vector<std::optional<double>> key(n);
  for (std::size_t i = 0; i < n; ++i)
    key[i] = task_priority(market.tds[i], market.econ, market.es.energy_per_cycle,
                           initial[i].price, initial[i].offload, market.uplink_rate(i));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a].has_value() != key[b].has_value()) return key[a].has_value();
    return key[a].has_value() && *key[a] > *key[b];
  });
  return order;
}

}  // namespace

std::size_t AllocationOutcome::rejections() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), TdStatus::Rejected));
}

long AllocationOutcome::total_increments() const {
  return std::accumulate(price_increments.begin(), price_increments.end(), 0L);
}

std::optional<double> task_priority(const TdProfile& td, const EconomicParams& econ,
                                    double es_energy, double price, double offload,
                                    double rate_up) {
  if (!(offload > 0.0)) return std::nullopt;
  const auto demand = es_resource_demand(td, offload, rate_up);
  if (!demand) return std::nullopt;
  return es_local_utility(price, es_energy, econ.energy_cost, td.task.complexity, offload) /
         *demand;
}

double ad_priority(const TdProfile& td, double reward, const EconomicParams& econ,
                   double bs_power, double price, double offload, double rate_relay) {
  return es_delegation_utility(price, reward, econ.energy_cost, bs_power, td.task.complexity,
                               offload, rate_relay);
}

double total_es_demand(const Market& market, std::span<const StackelbergSolution> solutions) {
  if (solutions.size() != market.tds.size())
    throw ContractViolation("one solution per TD is required");
  double total = 0.0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto f = es_resource_demand(market.tds[i], solutions[i].offload, market.uplink_rate(i));
    if (!f) return std::numeric_limits<double>::infinity();
    total += *f;
  }
  return total;
}

AllocationOutcome assign_tasks(const Market& market, std::span<const StackelbergSolution> initial,
                               std::span<const RecruitedAd> recruited,
                               const AssignmentRules& rules, IncrementPolicy policy) {
  check_inputs(market, initial, recruited, policy);
  AllocationOutcome out = blank_outcome(market, recruited);
  out.capacity_constrained = true;

  std::vector<double> relay_rates;
  for (std::size_t j = 0; j < recruited.size(); ++j) relay_rates.push_back(market.relay_rate(j));

  auto& es_left = out.ledger.es_remaining;
  auto& ad_left = out.ledger.ad_remaining;

  for (const std::size_t i : service_order(market, initial, rules.sort_by_priority)) {
    const auto& td = market.tds[i];
    const auto& start = initial[i];
    const double rate_up = market.uplink_rate(i);
    const FollowerContext follower{td, market.econ, rate_up};
    const double step = (start.price_cap - start.price) / policy.steps;

    double price = start.price;
    double offload = start.offload;
    auto& decision = out.decisions[i];
    int& increments = out.price_increments[i];

    for (;;) {
      const auto es_need = es_resource_demand(td, offload, rate_up);
      if (es_need && *es_need <= es_left) {
        es_left -= *es_need;
        decision = {price, offload, kEdgeServer};
        out.reserved[i] = *es_need;
        break;
      }

      std::optional<std::size_t> chosen;
      double chosen_priority = 0.0;
      double chosen_need = 0.0;
      for (std::size_t j = 0; j < recruited.size(); ++j) {
        const auto need = ad_resource_demand(td, offload, rate_up, relay_rates[j]);
        if (!need || *need > ad_left[j]) continue;
        const double q = ad_priority(td, recruited[j].reward, market.econ,
                                     market.channel.bs_power, price, offload, relay_rates[j]);
        if (q < 0.0) continue;
        if (!chosen || q > chosen_priority) {
          chosen = j;
          chosen_priority = q;
          chosen_need = *need;
          if (rules.ad_selection == AdSelection::FirstFit) break;
        }
      }
      if (chosen) {
        ad_left[*chosen] -= chosen_need;
        decision = {price, offload, *chosen + 1};
        out.status[i] = TdStatus::Delegated;
        out.reserved[i] = chosen_need;
        break;
      }

      if (!rules.price_increments) {
        decision = {price, 0.0, kEdgeServer};
        out.status[i] = TdStatus::Rejected;
        break;
      }
      ++increments;
      price = start.price + increments * step;
      if (increments >= policy.steps || price >= start.price_cap) {
        decision = {start.price_cap, 0.0, kEdgeServer};
        out.status[i] = TdStatus::Rejected;
        break;
      }
      offload = best_response(follower, price);
    }
  }

  settle(market, out);
  return out;
}

AllocationOutcome allocate(const Market& market, std::span<const StackelbergSolution> initial,
                           std::span<const RecruitedAd> recruited, IncrementPolicy policy) {
  check_inputs(market, initial, recruited, policy);
  const double demand = total_es_demand(market, initial);
  if (!(demand <= market.es.capacity)) return assign_tasks(market, initial, recruited, {}, policy);

  AllocationOutcome out = blank_outcome(market, recruited);
  for (std::size_t i = 0; i < initial.size(); ++i) {
    out.decisions[i] = {initial[i].price, initial[i].offload, kEdgeServer};
    out.reserved[i] = *es_resource_demand(market.tds[i], initial[i].offload, market.uplink_rate(i));
  }
  out.ledger.es_remaining = market.es.capacity - demand;
  settle(market, out);
  return out;
}

std::vector<std::string> replay_constraints(const Market& market, const AllocationOutcome& outcome,
                                            const ReplayOptions& options) {
  std::vector<std::string> issues;
  auto report = [&](std::size_t i, const std::string& what) {
    std::ostringstream os;
    os << "TD " << i << ": " << what;
    issues.push_back(os.str());
  };
  const double tol = options.rel_tolerance;
  const std::size_t n = market.tds.size();
  const std::size_t m_recruited = outcome.ad_rewards.size();
  if (outcome.decisions.size() != n || outcome.status.size() != n) {
    issues.emplace_back("outcome size does not match the TD count");
    return issues;
  }
  if (m_recruited != 0 && m_recruited != market.ads.size()) {
    issues.emplace_back("reward list does not match the AD count");
    return issues;
  }

  const double floor = market.econ.energy_cost * market.es.energy_per_cycle;
  double es_used = 0.0;
  std::vector<double> ad_used(market.ads.size(), 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& td = market.tds[i];
    const auto& d = outcome.decisions[i];
    const double rate_up = market.uplink_rate(i);

    if (d.offload < 0.0 || d.offload > td.task.size) report(i, "offload outside [0, L]");
    if (d.location > m_recruited) report(i, "location names an unrecruited AD");
    if (outcome.status[i] == TdStatus::Rejected && d.offload != 0.0)
      report(i, "rejected TD still offloads");

    if (options.enforce_price_bounds) {
      const double cap = price_cap(FollowerContext{td, market.econ, rate_up});
      const double lo = std::min(floor, cap);
      if (d.price < lo - tol * std::abs(lo) || d.price > cap + tol * std::abs(cap))
        report(i, "price outside [floor, cap]");
    }

    double es_gain = 0.0;
    if (d.location == kEdgeServer) {
      const auto need = es_resource_demand(td, d.offload, rate_up);
      if (!need)
        report(i, "ES cannot meet the deadline");
      else
        es_used += *need;
      es_gain = es_local_utility(d.price, market.es.energy_per_cycle, market.econ.energy_cost,
                                 td.task.complexity, d.offload);
    } else if (d.location <= m_recruited) {
      const std::size_t j = d.location - 1;
      const double relay = market.relay_rate(j);
      const auto need = ad_resource_demand(td, d.offload, rate_up, relay);
      if (!need)
        report(i, "AD cannot meet the deadline");
      else
        ad_used[j] += *need;
      es_gain = ad_priority(td, outcome.ad_rewards[j], market.econ, market.channel.bs_power,
                            d.price, d.offload, relay);
    }
    const double revenue = d.price * td.task.complexity * d.offload;
    if (es_gain < -tol * std::max(1.0, std::abs(revenue)))
      report(i, "ES individual rationality violated");

    const double u_td = td_utility(td, market.econ, d, rate_up);
    if (u_td < -tol * std::max(1.0, td.completion_value))
      report(i, "TD individual rationality violated");
  }

  const double cap_b = market.es.capacity;
  if (es_used > cap_b * (1.0 + tol)) issues.emplace_back("ES capacity exceeded");
  if (outcome.ledger.es_remaining < 0.0) issues.emplace_back("negative ES ledger");
  if (std::abs(outcome.ledger.es_remaining - (cap_b - es_used)) > tol * cap_b)
    issues.emplace_back("ES ledger does not match the replayed assignment");

  for (std::size_t j = 0; j < market.ads.size(); ++j) {
    const double cap_j = market.ads[j].capacity;
    std::ostringstream tag;
    tag << "AD " << (j + 1) << ": ";
    if (ad_used[j] > cap_j * (1.0 + tol)) issues.push_back(tag.str() + "capacity exceeded");
    if (j < outcome.ledger.ad_remaining.size()) {
      const double left = outcome.ledger.ad_remaining[j];
      if (left < 0.0) issues.push_back(tag.str() + "negative ledger");
      if (m_recruited != 0 && std::abs(left - (cap_j - ad_used[j])) > tol * cap_j)
        issues.push_back(tag.str() + "ledger does not match the replayed assignment");
    }
    if (m_recruited != 0 && outcome.ad_rewards[j] < market.ads[j].bid)
      issues.push_back(tag.str() + "reward below bid");
    if (j < outcome.ad_utilities.size() && outcome.ad_utilities[j] < 0.0)
      issues.push_back(tag.str() + "negative utility");
  }

  const double replayed = es_total_utility(market, outcome.ad_rewards, outcome.decisions);
  if (std::abs(replayed - outcome.es_utility) > tol * std::max(1.0, std::abs(replayed)))
    issues.emplace_back("ES utility does not match the replayed total");
  return issues;
}

}  // namespace mecprice
