#include "bwmj/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bwmj::algo {

Environment::Environment(const CanonicalInstance& instance, std::size_t horizon, std::uint64_t seed,
                         bool record_rounds)
    : instance_(instance), rng_(derive_stream(seed, "environment")), budget_{horizon, 0} {
  trace_.instance_id = instance.id;
  trace_.horizon = horizon;
  trace_.opt_value = optimum(instance).value;
  trace_.has_rounds = record_rounds;
  if (record_rounds) trace_.rounds.reserve(horizon);
}

double Environment::play(double alpha) {
  if (budget_.consumed >= budget_.horizon) throw BudgetExhausted{};
  const std::size_t i = interval_index(instance_, alpha);
  const double x = instance_.distributions[i].sample(rng_);
  const double u = instance_.linear_factor(alpha) * instance_.distributions[i].mean();
  ++budget_.consumed;
  trace_.sum_expected_utility += u;
  if (trace_.has_rounds) trace_.rounds.push_back({budget_.consumed, alpha, x, u});
  return x;
}

RunTrace Environment::finish() && {
  trace_.rounds_used = budget_.consumed;
  trace_.cumulative_pseudo_regret =
      static_cast<double>(budget_.consumed) * trace_.opt_value - trace_.sum_expected_utility;
  return std::move(trace_);
}

std::size_t samples_per_extreme(double delta, std::size_t horizon, double confidence) {
  const double t = static_cast<double>(horizon);
  const double n = std::ceil(8.0 / (delta * delta) * std::log(4.0 * t / confidence));
  // A non-finite or oversized count (confidence 0 at T = 1) would spend the
  // whole budget anyway.
  if (!std::isfinite(n) || n >= t) return std::max<std::size_t>(horizon, 1);
  return std::max<std::size_t>(static_cast<std::size_t>(n), 1);
}

double find_jumps_confidence(std::size_t horizon) { return 1.0 / static_cast<double>(horizon); }

double find_jumps_id_confidence(std::size_t horizon) {
  const double t = static_cast<double>(horizon);
  return std::log(t) / t;
}

namespace {

double sample_mean(Environment& env, double alpha, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += env.play(alpha);
  return std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
}

void find_jumps_impl(FindJumpsContext& ctx, Interval interval, std::size_t depth,
                     std::vector<Triplet>& out, bool capture) {
  ++ctx.calls;
  ctx.max_depth = std::max(ctx.max_depth, depth);
  const std::size_t horizon = ctx.env.horizon();
  const double inv_t = 1.0 / static_cast<double>(horizon);
  const std::size_t n = samples_per_extreme(ctx.delta, horizon, ctx.confidence);

  FindJumpsCall call{ctx.epoch, ctx.delta, depth, interval};
  if (interval.length() <= inv_t) {
    call.short_interval = true;
    call.estimate_right = sample_mean(ctx.env, interval.right, n);
    if (ctx.observer) ctx.observer->on_find_jumps(call);
    out.push_back({interval, 0.0, call.estimate_right});
    return;
  }

  call.estimate_left = sample_mean(ctx.env, interval.left, n);
  call.estimate_right = sample_mean(ctx.env, interval.right, n);
  if (call.estimate_right - call.estimate_left >= ctx.delta) {
    call.recursed = true;
    if (capture && interval.length() <= 2.0 * inv_t) {
      ctx.jump_sink->push_back(interval);
      call.added_to_jumps = true;
    }
    if (ctx.observer) ctx.observer->on_find_jumps(call);
    const double mid = 0.5 * (interval.left + interval.right);
    find_jumps_impl(ctx, {interval.left, mid}, depth + 1, out, capture);
    find_jumps_impl(ctx, {mid, interval.right}, depth + 1, out, capture);
    return;
  }
  if (ctx.observer) ctx.observer->on_find_jumps(call);
  out.push_back({interval, call.estimate_left, call.estimate_right});
}

}  // namespace

void find_jumps(FindJumpsContext& ctx, Interval interval, std::size_t depth, std::vector<Triplet>& out) {
  find_jumps_impl(ctx, interval, depth, out, false);
}

void find_jumps_id(FindJumpsContext& ctx, Interval interval, std::size_t depth,
                   std::vector<Triplet>& out) {
  if (!ctx.jump_sink) throw std::invalid_argument("find_jumps_id needs a jump sink");
  find_jumps_impl(ctx, interval, depth, out, true);
}

std::optional<Interval> optimistic_shrink(const Triplet& t, double delta, double opt_estimate,
                                          std::size_t horizon, const LinearFactor& lf) {
  const double inv_t = 1.0 / static_cast<double>(horizon);
  const Interval& in = t.interval;
  if (in.length() <= inv_t) {
    if (lf(in.right) * t.estimate_right + delta / 2.0 + inv_t >= opt_estimate) return in;
    return std::nullopt;
  }
  const double slack = 2.0 * delta + 2.0 * inv_t;
  if (t.estimate_left <= 0.0) {
    if (slack >= opt_estimate) return in;
    return std::nullopt;
  }
  // Keep {a in I : l(a) >= rhs}; l decreasing makes this a prefix of I.
  const double rhs = (opt_estimate - slack) / t.estimate_left;
  if (rhs <= lf(in.right)) return in;
  if (rhs > lf(in.left)) return std::nullopt;
  const double cut = std::clamp(lf.inverse(rhs), in.left, in.right);
  return Interval{in.left, cut};
}

double ucb_index(double mean, std::size_t pulls, std::size_t total) {
  return mean + std::sqrt(2.0 * std::log(static_cast<double>(total)) / static_cast<double>(pulls));
}

void ucb1(Environment& env, const std::vector<double>& arms) {
  if (arms.empty()) throw std::invalid_argument("ucb1 needs at least one arm");
  std::vector<UcbArmState> state;
  std::vector<double> sums(arms.size(), 0.0);
  for (double a : arms) state.push_back({a, 0, 0.0});
  std::size_t total = 0;
  const LinearFactor& lf = env.linear_factor();

  auto pull = [&](std::size_t i) {
    const double x = env.play(state[i].action);
    sums[i] += lf(state[i].action) * x;
    ++state[i].pull_count;
    state[i].mean_estimate = sums[i] / static_cast<double>(state[i].pull_count);
    ++total;
  };

  for (std::size_t i = 0; i < state.size(); ++i) pull(i);
  for (;;) {
    std::size_t best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.size(); ++i) {
      const double idx = ucb_index(state[i].mean_estimate, state[i].pull_count, total);
      if (idx > best_index) {
        best_index = idx;
        best = i;
      }
    }
    pull(best);
  }
}

namespace {

// Epoch loop shared by both variants. With gamma set, switches to UCB1 on
// W once delta_j < gamma / 4. Never returns; the budget ends the run.
[[noreturn]] void epoch_loop(Environment& env, RunObserver* observer, std::optional<double> gamma) {
  const std::size_t horizon = env.horizon();
  const LinearFactor& lf = env.linear_factor();
  const bool id = gamma.has_value();
  const double confidence = id ? find_jumps_id_confidence(horizon) : find_jumps_confidence(horizon);

  std::vector<Interval> current{{0.0, 1.0}};
  std::vector<Interval> jumps;
  for (std::size_t j = 1;; ++j) {
    const double delta = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(j, 1074)));
    if (id && !(delta >= *gamma / 4.0)) {
      std::vector<double> arms{0.0};
      for (const auto& jump : jumps) arms.push_back(jump.right);
      std::sort(arms.begin(), arms.end());
      arms.erase(std::unique(arms.begin(), arms.end()), arms.end());
      if (observer) observer->on_ucb_start(arms);
      ucb1(env, arms);
    }

    EpochState state;
    state.epoch = j;
    state.delta = delta;
    state.intervals = current;
    FindJumpsContext ctx{env, j, delta, confidence, id ? &jumps : nullptr, observer};
    for (const auto& in : current) {
      if (id)
        find_jumps_id(ctx, in, 1, state.triplets);
      else
        find_jumps(ctx, in, 1, state.triplets);
    }
    state.find_jumps_calls = ctx.calls;
    state.max_depth = ctx.max_depth;

    double opt = 0.0;
    double best = 0.0;
    for (const auto& t : state.triplets) {
      for (auto [a, est] : {std::pair{t.interval.left, t.estimate_left},
                            std::pair{t.interval.right, t.estimate_right}}) {
        const double v = lf(a) * est;
        if (v > opt) {
          opt = v;
          best = a;
        }
      }
    }
    state.opt_estimate = opt;
    state.best_action = best;
    state.all_estimates_zero = !(opt > 0.0);

    for (const auto& t : state.triplets)
      if (auto kept = optimistic_shrink(t, delta, opt, horizon, lf)) state.next_intervals.push_back(*kept);
    state.jumps = jumps;
    if (observer) observer->on_epoch_end(state);

    if (state.next_intervals.empty()) {
      for (;;) env.play(best);
    }
    current = std::move(state.next_intervals);
  }
}

template <class Body>
RunTrace run_with(const CanonicalInstance& instance, std::size_t horizon, std::uint64_t seed,
                  const RunOptions& options, Body&& body) {
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  Environment env(instance, horizon, seed, options.record_rounds);
  try {
    body(env);
  } catch (const BudgetExhausted&) {
  }
  return std::move(env).finish();
}

}  // namespace

RunTrace run_rji_os(const CanonicalInstance& instance, std::size_t horizon, std::uint64_t seed,
                    const RunOptions& options) {
  return run_with(instance, horizon, seed, options,
                  [&](Environment& env) { epoch_loop(env, options.observer, std::nullopt); });
}

RunTrace run_id_rji_os(const CanonicalInstance& instance, std::size_t horizon, double gamma,
                       std::uint64_t seed, const RunOptions& options) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
  return run_with(instance, horizon, seed, options,
                  [&](Environment& env) { epoch_loop(env, options.observer, gamma); });
}

std::size_t cube_root_ceil(std::size_t horizon) {
  auto k = static_cast<std::size_t>(std::cbrt(static_cast<double>(horizon)));
  while (k > 0 && (k - 1) * (k - 1) * (k - 1) >= horizon) --k;
  while (k * k * k < horizon) ++k;
  return std::max<std::size_t>(k, 1);
}

RunTrace run_uniform_grid_baseline(const CanonicalInstance& instance, std::size_t horizon,
                                   std::uint64_t seed, const RunOptions& options) {
  return run_with(instance, horizon, seed, options, [&](Environment& env) {
    const std::size_t k = cube_root_ceil(horizon);
    std::vector<double> arms;
    for (std::size_t i = 1; i <= k; ++i) arms.push_back(static_cast<double>(i) / static_cast<double>(k));
    if (options.observer) options.observer->on_ucb_start(arms);
    ucb1(env, arms);
  });
}

RunTrace run_ucb1_grid(const CanonicalInstance& instance, std::size_t horizon, std::size_t grid_size,
                       std::uint64_t seed, const RunOptions& options) {
  return run_with(instance, horizon, seed, options, [&](Environment& env) {
    const std::size_t k = grid_size == 0 ? cube_root_ceil(horizon) : grid_size;
    std::vector<double> arms;
    for (std::size_t i = 0; i <= k; ++i) arms.push_back(static_cast<double>(i) / static_cast<double>(k));
    if (options.observer) options.observer->on_ucb_start(arms);
    ucb1(env, arms);
  });
}

}  // namespace bwmj::algo
