#pragma once

#include <span>
#include <vector>

#include "mecprice/model.hpp"

namespace mecprice {

struct RecruitedAd {
  AdProfile ad;
  double reward = 0.0;  // d_j, $/cycle; never below ad.bid
};

/// Reverse-Vickrey recruitment of every AD. Each AD is paid the lowest bid
/// strictly above its own; an AD with no strictly higher competitor is paid
/// its own bid. Output order follows input order.
[[nodiscard]] std::vector<RecruitedAd> vickrey_rewards(std::span<const AdProfile> ads);

[[nodiscard]] std::vector<double> rewards_of(std::span<const RecruitedAd> recruited);

}  // namespace mecprice
