#pragma once

// Oracle-backed acceptance checks shared by the acceptance test binary and
// `mecsim verify`.

#include <functional>
#include <string>
#include <vector>

namespace mecprice {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  bool quick = false;    // fewer random draws and seeds; same checks and tolerances
  unsigned threads = 0;  // 0 = hardware concurrency
  // Called after each criterion finishes, in order.
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 12;

[[nodiscard]] std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "[PASS] 3 derivative fidelity: ... (0.12 s)"
[[nodiscard]] std::string format_result(const CriterionResult& result);

}  // namespace mecprice
