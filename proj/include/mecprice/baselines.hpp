#pragma once

// Comparison strategies. Each removes one ingredient of the full scheme and
// otherwise reuses its placement loop.

#include <optional>
#include <span>

#include "mecprice/allocator.hpp"

namespace mecprice {

inline constexpr int kUniformPriceGridPoints = 10000;

/// Price shared by all TDs: the point of a uniform grid over
/// [floor, smallest cap among TDs that can be served at a profit] that
/// maximizes the summed sufficient-capacity leader utility. std::nullopt when
/// every TD is priced out.
[[nodiscard]] std::optional<double> uniform_price(const Market& market,
                                                  int grid_points = kUniformPriceGridPoints);

/// Uniform pricing: one price for every TD, placement by priority, no price
/// increments. TDs that fit nowhere are rejected at the uniform price.
[[nodiscard]] AllocationOutcome allocate_uniform_pricing(const Market& market,
                                                         std::span<const RecruitedAd> recruited);

/// The full scheme with no ADs.
[[nodiscard]] AllocationOutcome allocate_no_recruitment(
    const Market& market, std::span<const StackelbergSolution> initial,
    IncrementPolicy policy = {});

/// Leader prices, but TDs are served in id order, each taking the ES or else
/// the first AD (by id) that fits with non-negative ES utility; no increments.
[[nodiscard]] AllocationOutcome allocate_no_priority(const Market& market,
                                                     std::span<const StackelbergSolution> initial,
                                                     std::span<const RecruitedAd> recruited);

}  // namespace mecprice
