#pragma once

// Domain types and the closed-form formula layer for a device-assisted edge
// computing market: one edge server (ES) behind a base station, task devices
// (TDs) that buy computation, and auxiliary devices (ADs) that sell it.
//
// Units: data in bits, work in CPU cycles, compute in cycles/s, power in W,
// energy in J, money in $. All functions are pure.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mecprice {

/// How distance enters the channel gain. `Decaying` is mu0 * d^-tau;
/// `Literal` is mu0 * d^+tau, kept for comparison runs only.
enum class PathLossConvention { Decaying, Literal };

struct ChannelParams {
  double bandwidth = 0.0;          // W_B, Hz
  double noise = 0.0;              // N0, W
  double fading = 0.0;             // mu0
  double pathloss_exponent = 0.0;  // tau
  double bs_power = 0.0;           // p_B, W
  PathLossConvention convention = PathLossConvention::Decaying;

  void validate() const;
};

struct TaskSpec {
  double size = 0.0;        // L, bits
  double complexity = 0.0;  // phi, cycles per bit
  double deadline = 0.0;    // t_max, s

  /// Total work C = phi * L.
  [[nodiscard]] double cycles() const { return complexity * size; }
  void validate() const;
};

struct EconomicParams {
  double energy_cost = 0.0;  // gamma, $/J

  void validate() const;
};

struct TdProfile {
  std::size_t id = 0;
  TaskSpec task;
  double tx_power = 0.0;          // p_i, W
  double satisfaction = 0.0;      // w_i, $
  double local_energy = 0.0;      // q_i, J/cycle
  double completion_value = 0.0;  // v_i, $
  double distance = 0.0;          // to the base station, m

  /// Cost of processing the whole task on-device; completion_value must cover it.
  [[nodiscard]] double local_processing_cost(const EconomicParams& econ) const {
    return econ.energy_cost * local_energy * task.cycles();
  }
  void validate(const EconomicParams& econ) const;
};

/// An auxiliary device. Ids are 1-based so that an offload location x == id.
struct AdProfile {
  std::size_t id = 0;
  double capacity = 0.0;  // F_j, cycles/s
  double bid = 0.0;       // a_j, $/cycle
  double distance = 0.0;  // to the base station, m

  void validate() const;
};

struct EsProfile {
  double capacity = 0.0;         // F_B, cycles/s
  double energy_per_cycle = 0.0; // q_B, J/cycle

  void validate() const;
};

/// Location 0 is the edge server; location j >= 1 is the AD with id j.
inline constexpr std::size_t kEdgeServer = 0;

struct OffloadDecision {
  double price = 0.0;    // d_i, $/cycle
  double offload = 0.0;  // l_i, bits
  std::size_t location = kEdgeServer;
};

/// A fully instantiated single-cell problem.
struct Market {
  std::vector<TdProfile> tds;
  std::vector<AdProfile> ads;
  EsProfile es;
  ChannelParams channel;
  EconomicParams econ;

  /// Throws DomainError on the first violated invariant, including q_B > q_i.
  void validate() const;

  /// R_i^B for TD index i.
  [[nodiscard]] double uplink_rate(std::size_t td_index) const;
  /// R_B^j for AD index j (0-based position in `ads`).
  [[nodiscard]] double relay_rate(std::size_t ad_index) const;
};

// --- communication -------------------------------------------------------

[[nodiscard]] double channel_gain(double fading, double distance, double exponent,
                                  PathLossConvention convention = PathLossConvention::Decaying);

/// Shannon rate W_B log2(1 + p g / N0).
[[nodiscard]] double link_rate(const ChannelParams& channel, double tx_power, double gain);

[[nodiscard]] double es_transfer_time(double offload, double rate_up);
[[nodiscard]] double ad_transfer_time(double offload, double rate_up, double rate_relay);

/// Minimum compute rate that finishes `cycles` within what the transfer leaves
/// of the deadline. std::nullopt means the deadline is already consumed by the
/// transfer and the location must be excluded.
[[nodiscard]] std::optional<double> min_resources(double cycles, double deadline,
                                                  double transfer_time);

/// f_i^B(l): ES compute needed for `offload` bits of the TD's task.
[[nodiscard]] std::optional<double> es_resource_demand(const TdProfile& td, double offload,
                                                       double rate_up);
/// f_i^j(l): AD compute needed when the task is relayed through the base station.
[[nodiscard]] std::optional<double> ad_resource_demand(const TdProfile& td, double offload,
                                                       double rate_up, double rate_relay);

// --- utilities -----------------------------------------------------------

[[nodiscard]] double td_satisfaction(double satisfaction, double offload);
[[nodiscard]] double td_payment(double price, double complexity, double offload);
[[nodiscard]] double td_energy_cost(const TdProfile& td, const EconomicParams& econ,
                                    double offload, double rate_up);
[[nodiscard]] double td_utility(const TdProfile& td, const EconomicParams& econ,
                                const OffloadDecision& decision, double rate_up);

[[nodiscard]] double es_local_utility(double price, double es_energy, double energy_cost,
                                      double complexity, double offload);
[[nodiscard]] double es_delegation_utility(double price, double reward, double energy_cost,
                                           double bs_power, double complexity, double offload,
                                           double rate_relay);

/// Total ES utility for a set of decisions. `ad_rewards[j-1]` is the per-cycle
/// reward paid to the AD with id j.
[[nodiscard]] double es_total_utility(const Market& market, std::span<const double> ad_rewards,
                                      std::span<const OffloadDecision> decisions);

[[nodiscard]] double ad_utility(double reward, double bid, double assigned_cycles);

}  // namespace mecprice
