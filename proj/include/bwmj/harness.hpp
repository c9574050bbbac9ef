#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwmj/algorithms.hpp"
#include "bwmj/instance.hpp"
#include "bwmj/trace.hpp"

namespace bwmj::harness {

// T * OPT - sum of u(alpha_t). Recomputed from the rounds when present,
// otherwise from the accumulated utility sum.
double pseudo_regret(const RunTrace& trace, const CanonicalInstance& instance);

std::uint64_t replication_seed(std::uint64_t master_seed, const std::string& instance_id,
                               const std::string& algorithm_id, std::size_t horizon, std::size_t rep);

struct AlgorithmSpec {
  std::string id;          // registry key
  double gamma = 0.0;      // id-rji-os
  std::size_t grid_size = 0;  // ucb1-grid, 0 = ceil(T^(1/3))
};

using AlgorithmFn = std::function<RunTrace(const CanonicalInstance&, std::size_t horizon, std::uint64_t seed,
                                           const AlgorithmSpec&, const algo::RunOptions&)>;

class UnknownAlgorithm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AlgorithmRegistry {
 public:
  // rji-os, id-rji-os, uniform-grid, ucb1-grid.
  static AlgorithmRegistry builtin();

  void add(const std::string& id, AlgorithmFn fn);
  const AlgorithmFn& get(const std::string& id) const;
  bool contains(const std::string& id) const { return fns_.count(id) != 0; }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, AlgorithmFn> fns_;
};

struct ExperimentConfig {
  std::vector<CanonicalInstance> instances;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::size_t> horizons;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  bool record_traces = false;
  // Drop the algorithm id from seed derivation so every algorithm sees the
  // same environment streams (paired comparisons).
  bool paired_seeds = false;
};

// Throws std::invalid_argument on an unusable config.
void check(const ExperimentConfig& config, const AlgorithmRegistry& registry);

struct RawResult {
  std::string algorithm;
  std::string instance_id;
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double final_pseudo_regret = 0.0;
  std::size_t rounds_used = 0;
};

struct AggregateResult {
  std::string algorithm;
  std::string instance_id;
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::size_t reps = 0;
  double mean_regret = 0.0;
  double std = 0.0;  // sample standard deviation
  double ci95 = 0.0;  // 1.96 std / sqrt(reps)
};

struct ExperimentResult {
  std::vector<RawResult> raw;  // ordered by (instance, algorithm, T, rep)
  std::vector<AggregateResult> aggregate;
  std::vector<RunTrace> traces;  // parallel to raw when record_traces
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const AlgorithmRegistry& registry = AlgorithmRegistry::builtin());

// Groups by (algorithm, instance, T) in order of first appearance.
std::vector<AggregateResult> aggregate(const std::vector<RawResult>& raw);

class FitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// OLS slope of log(mean regret) on log(T). Needs >= 3 distinct horizons and
// positive means.
double fit_regret_exponent(const std::vector<AggregateResult>& results);

struct ExponentFit {
  std::string algorithm;
  std::string instance_id;
  std::size_t horizons = 0;
  double slope = 0.0;
};

// One fit per (algorithm, instance) group.
std::vector<ExponentFit> fit_exponents(const std::vector<AggregateResult>& results);

std::string format_double(double x);

void write_raw_csv(std::ostream& out, const std::vector<RawResult>& raw);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateResult>& agg);
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_exponent_csv(std::ostream& out, const std::vector<ExponentFit>& fits);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<RawResult> read_raw_csv(std::istream& in);
std::vector<AggregateResult> read_aggregate_csv(std::istream& in);

}  // namespace bwmj::harness
