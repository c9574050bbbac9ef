#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bwmj {

struct Round {
  std::size_t t = 0;  // 1-based
  double action = 0.0;
  double observation = 0.0;
  double expected_utility = 0.0;
};

// Outcome of one run. Per-round records are kept only when requested; the
// utility sum is always accumulated so regret needs no rounds.
struct RunTrace {
  std::string instance_id;
  std::size_t horizon = 0;
  std::size_t rounds_used = 0;
  double opt_value = 0.0;
  double sum_expected_utility = 0.0;
  double cumulative_pseudo_regret = 0.0;
  bool has_rounds = false;
  std::vector<Round> rounds;
};

}  // namespace bwmj
