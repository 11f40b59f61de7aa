#pragma once

// The acceptance suite: one numbered criterion per explicit-constant
// inequality or rate claim, each returning a single pass/fail line.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ergo {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  int threads = 0;
  std::uint64_t seed = 20240611;
  std::vector<int> only;  // empty = all
  std::function<void(const CriterionResult&)> on_result;
};

constexpr int kCriterionCount = 11;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

// "PASS [3] martingale MZ ... (12.3 s)"
std::string format_line(const CriterionResult& r);

}  // namespace ergo
