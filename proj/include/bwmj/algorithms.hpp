#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bwmj/instance.hpp"
#include "bwmj/rng.hpp"
#include "bwmj/trace.hpp"

namespace bwmj::algo {

// Thrown by Environment::play once the horizon is spent. Run entry points
// catch it; it is the normal way a run ends.
struct BudgetExhausted {};

struct RoundBudget {
  std::size_t horizon = 0;
  std::size_t consumed = 0;

  std::size_t remaining() const noexcept { return horizon - consumed; }
};

// The learner's only view of an instance: play an action, get x back. The
// linear factor is public knowledge. Expected utilities are recorded on the
// harness side for regret accounting and never returned to the caller.
class Environment {
 public:
  Environment(const CanonicalInstance& instance, std::size_t horizon, std::uint64_t seed,
              bool record_rounds = false);

  double play(double alpha);

  const LinearFactor& linear_factor() const noexcept { return instance_.linear_factor; }
  const RoundBudget& budget() const noexcept { return budget_; }
  std::size_t horizon() const noexcept { return budget_.horizon; }

  RunTrace finish() &&;

 private:
  const CanonicalInstance& instance_;
  Rng rng_;
  RoundBudget budget_;
  RunTrace trace_;
};

struct Interval {
  double left = 0.0;
  double right = 1.0;

  double length() const noexcept { return right - left; }
  bool contains(double a) const noexcept { return left <= a && a <= right; }
  bool operator==(const Interval&) const = default;
};

struct Triplet {
  Interval interval;
  double estimate_left = 0.0;
  double estimate_right = 0.0;
};

struct EpochState {
  std::size_t epoch = 0;
  double delta = 0.0;
  std::vector<Interval> intervals;       // I_j
  std::vector<Triplet> triplets;         // T_j
  double opt_estimate = 0.0;             // OPT(j)
  double best_action = 0.0;              // alpha*_j
  bool all_estimates_zero = false;       // alpha*_j left at its 0 default
  std::vector<Interval> next_intervals;  // I_{j+1}
  std::vector<Interval> jumps;           // J, cumulative (ID variant)
  std::size_t find_jumps_calls = 0;
  std::size_t max_depth = 0;
};

struct FindJumpsCall {
  std::size_t epoch = 0;
  double delta = 0.0;
  std::size_t depth = 0;
  Interval interval;
  bool short_interval = false;
  double estimate_left = 0.0;
  double estimate_right = 0.0;
  bool recursed = false;
  bool added_to_jumps = false;
};

// Instrumentation hooks, used by the invariant tests. Calls are reported in
// pre-order once both estimates are known.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_find_jumps(const FindJumpsCall&) {}
  virtual void on_epoch_end(const EpochState&) {}
  virtual void on_ucb_start(const std::vector<double>& /*arms*/) {}
};

// Samples per extreme: ceil(8 / delta^2 * ln(4T / confidence)), capped at T.
std::size_t samples_per_extreme(double delta, std::size_t horizon, double confidence);

double find_jumps_confidence(std::size_t horizon);     // 1/T
double find_jumps_id_confidence(std::size_t horizon);  // ln(T)/T

struct FindJumpsContext {
  Environment& env;
  std::size_t epoch = 1;
  double delta = 0.5;
  double confidence = 0.0;
  std::vector<Interval>* jump_sink = nullptr;  // set for the ID variant
  RunObserver* observer = nullptr;
  std::size_t calls = 0;
  std::size_t max_depth = 0;
};

void find_jumps(FindJumpsContext& ctx, Interval interval, std::size_t depth, std::vector<Triplet>& out);

// Find-Jumps with the ID confidence and jump capture into *ctx.jump_sink.
void find_jumps_id(FindJumpsContext& ctx, Interval interval, std::size_t depth,
                   std::vector<Triplet>& out);

std::optional<Interval> optimistic_shrink(const Triplet& t, double delta, double opt_estimate,
                                          std::size_t horizon, const LinearFactor& lf);

struct UcbArmState {
  double action = 0.0;
  std::size_t pull_count = 0;
  double mean_estimate = 0.0;
};

double ucb_index(double mean, std::size_t pulls, std::size_t total);

// Plays until the budget runs out (never returns normally).
[[noreturn]] void ucb1(Environment& env, const std::vector<double>& arms);

struct RunOptions {
  bool record_rounds = false;
  RunObserver* observer = nullptr;
};

RunTrace run_rji_os(const CanonicalInstance& instance, std::size_t horizon, std::uint64_t seed,
                    const RunOptions& options = {});

RunTrace run_id_rji_os(const CanonicalInstance& instance, std::size_t horizon, double gamma,
                       std::uint64_t seed, const RunOptions& options = {});

// Smallest K with K^3 >= T.
std::size_t cube_root_ceil(std::size_t horizon);

// UCB1 over {i/K : i = 1..K}, K = ceil(T^(1/3)).
RunTrace run_uniform_grid_baseline(const CanonicalInstance& instance, std::size_t horizon,
                                   std::uint64_t seed, const RunOptions& options = {});

// UCB1 over {i/K : i = 0..K}; K defaults to ceil(T^(1/3)) when 0.
RunTrace run_ucb1_grid(const CanonicalInstance& instance, std::size_t horizon, std::size_t grid_size,
                       std::uint64_t seed, const RunOptions& options = {});

}  // namespace bwmj::algo
