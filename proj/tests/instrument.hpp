#pragma once

// Recording observer plus the per-epoch invariant checks shared by the unit
// tests and the acceptance binary. Truth comes from the oracles, never from
// the algorithm's own bookkeeping.

#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bwmj/algorithms.hpp"
#include "oracles.hpp"

namespace testing {

struct Recorder : bwmj::algo::RunObserver {
  std::vector<bwmj::algo::FindJumpsCall> calls;
  std::vector<bwmj::algo::EpochState> epochs;
  std::vector<std::vector<double>> ucb_arms;

  void on_find_jumps(const bwmj::algo::FindJumpsCall& c) override { calls.push_back(c); }
  void on_epoch_end(const bwmj::algo::EpochState& s) override { epochs.push_back(s); }
  void on_ucb_start(const std::vector<double>& arms) override { ucb_arms.push_back(arms); }
};

struct InvariantReport {
  std::size_t violations = 0;
  std::size_t completed_epochs = 0;
  std::size_t calls = 0;
  std::vector<std::string> messages;

  void fail(const std::string& m) {
    ++violations;
    if (messages.size() < 20) messages.push_back(m);
  }
};

inline std::size_t ceil_log2(std::size_t t) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < t) ++k;
  return k;
}

// Deterministic-feedback invariants of one instrumented RJI-OS run.
inline InvariantReport check_invariants(const bwmj::CanonicalInstance& inst, std::size_t horizon, const Recorder& rec) {
  InvariantReport rep;
  rep.completed_epochs = rec.epochs.size();
  rep.calls = rec.calls.size();
  const auto truth = oracle::grid_optimum(inst, 10000);
  const double opt = truth.value;
  const double alpha_star = truth.action;
  const double inv_t = 1.0 / static_cast<double>(horizon);
  const std::size_t lg = ceil_log2(horizon);
  const double n = static_cast<double>(inst.size());
  auto mean_at = [&](double a) { return inst.distributions[oracle::interval_of(inst, a)].mean(); };
  auto where = [](std::size_t j, const std::string& what) {
    std::ostringstream os;
    os << "epoch " << j << ": " << what;
    return os.str();
  };

  std::map<std::size_t, std::size_t> calls_per_epoch;
  for (const auto& c : rec.calls) {
    ++calls_per_epoch[c.epoch];
    if (c.depth > lg + 1) rep.fail(where(c.epoch, "recursion depth " + std::to_string(c.depth)));
    if (!c.short_interval && mean_at(c.interval.left) == mean_at(c.interval.right) && c.recursed)
      rep.fail(where(c.epoch, "recursed on equal-mean extremes"));
    // Returned triplets: short, or mean spread over the interval <= 3/2 delta.
    if (!c.recursed && !c.short_interval &&
        mean_at(c.interval.right) - mean_at(c.interval.left) > 1.5 * c.delta)
      rep.fail(where(c.epoch, "returned triplet spans a gap above 3/2 delta"));
    // Actions played in epoch j+1 after a completed epoch j.
    if (c.epoch >= 2 && c.epoch - 1 <= rec.epochs.size()) {
      const double prev_delta = std::ldexp(1.0, -static_cast<int>(c.epoch - 1));
      const double floor = opt - 4.0 * prev_delta - 2.0 * inv_t;
      if (oracle::utility(inst, c.interval.right) < floor ||
          (!c.short_interval && oracle::utility(inst, c.interval.left) < floor))
        rep.fail(where(c.epoch, "played an action below OPT - 4 delta_{j-1} - 2/T"));
    }
  }
  for (const auto& [j, count] : calls_per_epoch) {
    if (static_cast<double>(count) > static_cast<double>(j + 2) * n * static_cast<double>(lg))
      rep.fail(where(j, std::to_string(count) + " find_jumps calls"));
  }
  for (const auto& e : rec.epochs) {
    auto contains_star = [&](const std::vector<bwmj::algo::Interval>& v) {
      for (const auto& in : v)
        if (in.contains(alpha_star)) return true;
      return false;
    };
    if (!contains_star(e.intervals)) rep.fail(where(e.epoch, "optimum left I_j"));
    if (!contains_star(e.next_intervals)) rep.fail(where(e.epoch, "optimum left I_{j+1}"));
    if (e.opt_estimate < opt - 1.75 * e.delta - inv_t) rep.fail(where(e.epoch, "OPT(j) too small"));
  }
  return rep;
}

}  // namespace testing
