#pragma once

// Brute-force reference implementations. Deliberately share no code paths
// with the library beyond the plain data types: linear scans instead of
// binary search, explicit enumeration instead of envelopes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "bwmj/environments.hpp"
#include "bwmj/instance.hpp"
#include "bwmj/trace.hpp"

namespace oracle {

inline double factor(const bwmj::CanonicalInstance& inst, double a) {
  return inst.linear_factor.at_zero + a * (inst.linear_factor.at_one - inst.linear_factor.at_zero);
}

// Interval by linear scan, 0-based.
inline std::size_t interval_of(const bwmj::CanonicalInstance& inst, double a) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (inst.breakpoints[i] <= a) idx = i;
  return idx;
}

inline double utility(const bwmj::CanonicalInstance& inst, double a) {
  return factor(inst, a) * inst.distributions[interval_of(inst, a)].mean();
}

struct GridMax {
  double value = -std::numeric_limits<double>::infinity();
  double action = 0.0;
};

// Max of u over {i/points} plus every breakpoint, ties to the smaller action.
inline GridMax grid_optimum(const bwmj::CanonicalInstance& inst, std::size_t points = 100000) {
  std::vector<double> grid;
  grid.reserve(points + 1 + inst.breakpoints.size());
  for (std::size_t i = 0; i <= points; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(points));
  grid.insert(grid.end(), inst.breakpoints.begin(), inst.breakpoints.end());
  std::sort(grid.begin(), grid.end());
  GridMax best;
  for (double a : grid) {
    const double v = utility(inst, a);
    if (v > best.value) best = {v, a};
  }
  return best;
}

// Agent's best response by enumeration, ties to the larger expected reward,
// then the lower index.
inline std::size_t best_response(const bwmj::env::ContractProblem& p, double rho) {
  std::size_t best = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  double best_r = 0.0;
  for (std::size_t i = 0; i < p.num_actions(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < p.rewards.size(); ++j) r += p.outcome_distributions[i][j] * p.rewards[j];
    const double u = rho * r - p.costs[i];
    if (u > best_u || (u == best_u && r > best_r)) {
      best = i;
      best_u = u;
      best_r = r;
    }
  }
  return best;
}

inline double principal_utility(const bwmj::env::ContractProblem& p, double rho) {
  const std::size_t i = best_response(p, rho);
  double r = 0.0;
  for (std::size_t j = 0; j < p.rewards.size(); ++j) r += p.outcome_distributions[i][j] * p.rewards[j];
  return (1.0 - rho) * r;
}

// Revenue of posting price p: p * P{v >= p}.
inline double posted_price_revenue(const bwmj::env::PostedPriceProblem& prob, double price) {
  double sell = 0.0;
  for (std::size_t i = 0; i < prob.valuations.size(); ++i)
    if (prob.valuations[i] >= price) sell += prob.probabilities[i];
  return price * sell;
}

// (v - b) P{b >= m}.
inline double first_price_utility(const bwmj::env::FirstPriceProblem& prob, double bid) {
  double win = 0.0;
  for (std::size_t i = 0; i < prob.competitor_bids.size(); ++i)
    if (bid >= prob.competitor_bids[i]) win += prob.probabilities[i];
  return (prob.valuation - bid) * win;
}

// T * OPT - sum u(alpha_t) straight from the dumped rounds.
inline double recompute_regret(const bwmj::RunTrace& trace, const bwmj::CanonicalInstance& inst) {
  double opt = grid_optimum(inst, 1000).value;  // breakpoints carry the true max
  double sum = 0.0;
  for (const auto& r : trace.rounds) sum += utility(inst, r.action);
  return static_cast<double>(trace.rounds.size()) * opt - sum;
}

// Largest grid point a in [left, right] with l(a) * mu_left + slack >= opt,
// scanning `points` steps; returns left - 1 when none qualifies.
inline double shrink_scan(double left, double right, double mu_left, double slack, double opt,
                          double at_zero, double at_one, std::size_t points = 1000000) {
  double last = left - 1.0;
  for (std::size_t i = 0; i <= points; ++i) {
    const double a = left + (right - left) * static_cast<double>(i) / static_cast<double>(points);
    const double l = at_zero + a * (at_one - at_zero);
    if (l * mu_left + slack >= opt) last = a;
  }
  return last;
}

}  // namespace oracle
