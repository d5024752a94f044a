#include "mecprice/model.hpp"

#include <cmath>
#include <string>

#include "mecprice/errors.hpp"

namespace mecprice {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

void ChannelParams::validate() const {
  require(bandwidth > 0.0, "channel bandwidth must be positive");
  require(noise > 0.0, "channel noise must be positive");
  require(fading > 0.0, "fading component must be positive");
  require(pathloss_exponent > 0.0, "path loss exponent must be positive");
  require(bs_power > 0.0, "base station power must be positive");
}

void TaskSpec::validate() const {
  require(size > 0.0, "task size must be positive");
  require(complexity > 0.0, "task complexity must be positive");
  require(deadline > 0.0, "task deadline must be positive");
}

void EconomicParams::validate() const {
  require(energy_cost > 0.0, "unit energy cost must be positive");
}

void TdProfile::validate(const EconomicParams& econ) const {
  task.validate();
  require(tx_power > 0.0, "TD transmit power must be positive");
  require(satisfaction > 0.0, "TD satisfaction factor must be positive");
  require(local_energy > 0.0, "TD energy per cycle must be positive");
  require(distance > 0.0, "TD distance must be positive");
  // U_i(0) >= 0, so the follower's individual rationality never binds.
  require(completion_value >= local_processing_cost(econ),
          "TD completion value must cover full local processing cost");
}

void AdProfile::validate() const {
  require(id >= 1, "AD ids are 1-based");
  require(capacity > 0.0, "AD capacity must be positive");
  require(bid >= 0.0, "AD bid must be non-negative");
  require(distance > 0.0, "AD distance must be positive");
}

void EsProfile::validate() const {
  require(capacity > 0.0, "ES capacity must be positive");
  require(energy_per_cycle > 0.0, "ES energy per cycle must be positive");
}

void Market::validate() const {
  channel.validate();
  econ.validate();
  es.validate();
  for (const auto& td : tds) {
    td.validate(econ);
    require(es.energy_per_cycle > td.local_energy,
            "ES energy per cycle must exceed every TD's (q_B > q_i), TD " + std::to_string(td.id));
  }
  for (std::size_t j = 0; j < ads.size(); ++j) {
    ads[j].validate();
    require(ads[j].id == j + 1, "AD ids must equal position + 1");
  }
}

double Market::uplink_rate(std::size_t td_index) const {
  const auto& td = tds.at(td_index);
  const double gain =
      channel_gain(channel.fading, td.distance, channel.pathloss_exponent, channel.convention);
  return link_rate(channel, td.tx_power, gain);
}

double Market::relay_rate(std::size_t ad_index) const {
  const auto& ad = ads.at(ad_index);
  const double gain =
      channel_gain(channel.fading, ad.distance, channel.pathloss_exponent, channel.convention);
  return link_rate(channel, channel.bs_power, gain);
}

double channel_gain(double fading, double distance, double exponent,
                    PathLossConvention convention) {
  require(distance > 0.0, "distance must be positive");
  require(fading > 0.0, "fading component must be positive");
  const double signed_exponent = convention == PathLossConvention::Decaying ? -exponent : exponent;
  return fading * std::pow(distance, signed_exponent);
}

double link_rate(const ChannelParams& channel, double tx_power, double gain) {
  require(tx_power >= 0.0, "transmit power must be non-negative");
  return channel.bandwidth * std::log2(1.0 + tx_power * gain / channel.noise);
}

double es_transfer_time(double offload, double rate_up) {
  if (!(rate_up > 0.0)) throw InfeasibleLink("uplink rate is zero");
  return offload / rate_up;
}

double ad_transfer_time(double offload, double rate_up, double rate_relay) {
  if (!(rate_up > 0.0)) throw InfeasibleLink("uplink rate is zero");
  if (!(rate_relay > 0.0)) throw InfeasibleLink("relay rate is zero");
  return offload / rate_up + offload / rate_relay;
}

std::optional<double> min_resources(double cycles, double deadline, double transfer_time) {
  require(cycles >= 0.0, "cycles must be non-negative");
  if (cycles == 0.0) return 0.0;
  const double slack = deadline - transfer_time;
  if (!(slack > 0.0)) return std::nullopt;
  return cycles / slack;
}

std::optional<double> es_resource_demand(const TdProfile& td, double offload, double rate_up) {
  return min_resources(td.task.complexity * offload, td.task.deadline,
                       es_transfer_time(offload, rate_up));
}

std::optional<double> ad_resource_demand(const TdProfile& td, double offload, double rate_up,
                                         double rate_relay) {
  return min_resources(td.task.complexity * offload, td.task.deadline,
                       ad_transfer_time(offload, rate_up, rate_relay));
}

double td_satisfaction(double satisfaction, double offload) {
  return satisfaction * std::log1p(offload);
}

double td_payment(double price, double complexity, double offload) {
  return price * complexity * offload;
}

double td_energy_cost(const TdProfile& td, const EconomicParams& econ, double offload,
                      double rate_up) {
  const double local = econ.energy_cost * td.local_energy * td.task.complexity *
                       (td.task.size - offload);
  // l = 0 must not require a usable uplink.
  const double transmit =
      offload == 0.0 ? 0.0 : econ.energy_cost * td.tx_power * es_transfer_time(offload, rate_up);
  return local + transmit;
}

double td_utility(const TdProfile& td, const EconomicParams& econ,
                  const OffloadDecision& decision, double rate_up) {
  const double l = decision.offload;
  return td_satisfaction(td.satisfaction, l) + td.completion_value -
         td_energy_cost(td, econ, l, rate_up) - td_payment(decision.price, td.task.complexity, l);
}

double es_local_utility(double price, double es_energy, double energy_cost, double complexity,
                        double offload) {
  return (price - energy_cost * es_energy) * complexity * offload;
}

double es_delegation_utility(double price, double reward, double energy_cost, double bs_power,
                             double complexity, double offload, double rate_relay) {
  if (!(rate_relay > 0.0)) throw InfeasibleLink("relay rate is zero");
  return price * complexity * offload - reward * complexity * offload -
         energy_cost * bs_power * offload / rate_relay;
}

double es_total_utility(const Market& market, std::span<const double> ad_rewards,
                        std::span<const OffloadDecision> decisions) {
  if (decisions.size() != market.tds.size())
    throw ContractViolation("one decision per TD is required");
  double total = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    const double phi = market.tds[i].task.complexity;
    if (d.location == kEdgeServer) {
      total += es_local_utility(d.price, market.es.energy_per_cycle, market.econ.energy_cost, phi,
                                d.offload);
    } else {
      if (d.location > ad_rewards.size())
        throw ContractViolation("decision names an AD without a reward");
      const std::size_t j = d.location - 1;
      total += es_delegation_utility(d.price, ad_rewards[j], market.econ.energy_cost,
                                     market.channel.bs_power, phi, d.offload,
                                     market.relay_rate(j));
    }
  }
  return total;
}

double ad_utility(double reward, double bid, double assigned_cycles) {
  require(assigned_cycles >= 0.0, "assigned cycles must be non-negative");
  return (reward - bid) * assigned_cycles;
}

}  // namespace mecprice
