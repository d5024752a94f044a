#include "mecprice/auction.hpp"

#include <algorithm>

namespace mecprice {

std::vector<RecruitedAd> vickrey_rewards(std::span<const AdProfile> ads) {
  std::vector<double> bids;
  bids.reserve(ads.size());
  for (const auto& ad : ads) bids.push_back(ad.bid);
  std::sort(bids.begin(), bids.end());

  std::vector<RecruitedAd> out;
  out.reserve(ads.size());
  for (const auto& ad : ads) {
    const auto next = std::upper_bound(bids.begin(), bids.end(), ad.bid);
    out.push_back({ad, next == bids.end() ? ad.bid : *next});
  }
  return out;
}

std::vector<double> rewards_of(std::span<const RecruitedAd> recruited) {
  std::vector<double> out;
  out.reserve(recruited.size());
  for (const auto& r : recruited) out.push_back(r.reward);
  return out;
}

}  // namespace mecprice
