#include "bwmj/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace bwmj::harness {

double pseudo_regret(const RunTrace& trace, const CanonicalInstance& instance) {
  if (trace.instance_id != instance.id)
    throw std::invalid_argument("trace belongs to instance '" + trace.instance_id + "', not '" + instance.id +
                                "'");
  if (trace.rounds_used != trace.horizon)
    throw std::invalid_argument("trace is incomplete: " + std::to_string(trace.rounds_used) + " of " +
                                std::to_string(trace.horizon) + " rounds");
  const double opt = optimum(instance).value;
  double sum = 0.0;
  if (trace.has_rounds) {
    if (trace.rounds.size() != trace.rounds_used)
      throw std::invalid_argument("trace round count does not match rounds_used");
    for (const auto& r : trace.rounds) sum += expected_utility(instance, r.action);
  } else {
    sum = trace.sum_expected_utility;
  }
  return static_cast<double>(trace.horizon) * opt - sum;
}

std::uint64_t replication_seed(std::uint64_t master_seed, const std::string& instance_id,
                               const std::string& algorithm_id, std::size_t horizon, std::size_t rep) {
  std::uint64_t h = splitmix64(master_seed);
  h = hash_combine(h, fnv1a64(instance_id));
  h = hash_combine(h, fnv1a64(algorithm_id));
  h = hash_combine(h, static_cast<std::uint64_t>(horizon));
  return hash_combine(h, static_cast<std::uint64_t>(rep));
}

AlgorithmRegistry AlgorithmRegistry::builtin() {
  AlgorithmRegistry r;
  r.add("rji-os", [](const CanonicalInstance& inst, std::size_t t, std::uint64_t seed, const AlgorithmSpec&,
                     const algo::RunOptions& o) { return algo::run_rji_os(inst, t, seed, o); });
  r.add("id-rji-os", [](const CanonicalInstance& inst, std::size_t t, std::uint64_t seed,
                        const AlgorithmSpec& spec, const algo::RunOptions& o) {
    return algo::run_id_rji_os(inst, t, spec.gamma, seed, o);
  });
  r.add("uniform-grid", [](const CanonicalInstance& inst, std::size_t t, std::uint64_t seed,
                           const AlgorithmSpec&, const algo::RunOptions& o) {
    return algo::run_uniform_grid_baseline(inst, t, seed, o);
  });
  r.add("ucb1-grid", [](const CanonicalInstance& inst, std::size_t t, std::uint64_t seed,
                        const AlgorithmSpec& spec, const algo::RunOptions& o) {
    return algo::run_ucb1_grid(inst, t, spec.grid_size, seed, o);
  });
  return r;
}

void AlgorithmRegistry::add(const std::string& id, AlgorithmFn fn) { fns_[id] = std::move(fn); }

const AlgorithmFn& AlgorithmRegistry::get(const std::string& id) const {
  auto it = fns_.find(id);
  if (it == fns_.end()) throw UnknownAlgorithm("unknown algorithm '" + id + "'");
  return it->second;
}

std::vector<std::string> AlgorithmRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : fns_) out.push_back(k);
  return out;
}

void check(const ExperimentConfig& config, const AlgorithmRegistry& registry) {
  if (config.instances.empty()) throw std::invalid_argument("config lists no instances");
  if (config.algorithms.empty()) throw std::invalid_argument("config lists no algorithms");
  if (config.horizons.empty()) throw std::invalid_argument("config lists no horizons");
  if (config.replications == 0) throw std::invalid_argument("replications must be at least 1");
  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    if (config.horizons[i] == 0) throw std::invalid_argument("horizons must be positive");
    if (i > 0 && config.horizons[i] <= config.horizons[i - 1])
      throw std::invalid_argument("horizons must be strictly increasing");
  }
  for (const auto& a : config.algorithms) {
    registry.get(a.id);
    if (a.id == "id-rji-os" && !(a.gamma > 0.0)) throw std::invalid_argument("id-rji-os needs gamma > 0");
  }
  std::set<std::string> ids;
  for (const auto& inst : config.instances) {
    if (auto v = validate(inst); !v.empty()) throw InvalidInstance(std::move(v));
    if (!ids.insert(inst.id).second) throw std::invalid_argument("duplicate instance id '" + inst.id + "'");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const AlgorithmRegistry& registry) {
  check(config, registry);

  struct Job {
    const CanonicalInstance* instance;
    const AlgorithmSpec* algorithm;
    std::size_t horizon;
    std::size_t rep;
  };
  std::vector<Job> jobs;
  for (const auto& inst : config.instances)
    for (const auto& alg : config.algorithms)
      for (std::size_t t : config.horizons)
        for (std::size_t rep = 0; rep < config.replications; ++rep) jobs.push_back({&inst, &alg, t, rep});

  ExperimentResult result;
  result.raw.resize(jobs.size());
  if (config.record_traces) result.traces.resize(jobs.size());

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const std::string seed_key = config.paired_seeds ? std::string() : job.algorithm->id;
    const std::uint64_t seed =
        replication_seed(config.master_seed, job.instance->id, seed_key, job.horizon, job.rep);
    algo::RunOptions opts;
    opts.record_rounds = config.record_traces;
    RunTrace trace = registry.get(job.algorithm->id)(*job.instance, job.horizon, seed, *job.algorithm, opts);
    RawResult& r = result.raw[idx];
    r.algorithm = job.algorithm->id;
    r.instance_id = job.instance->id;
    r.n = job.instance->size();
    r.horizon = job.horizon;
    r.rep = job.rep;
    r.seed = seed;
    r.final_pseudo_regret = pseudo_regret(trace, *job.instance);
    r.rounds_used = trace.rounds_used;
    if (config.record_traces) result.traces[idx] = std::move(trace);
  };

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(jobs.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            run_job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.aggregate = aggregate(result.raw);
  return result;
}

std::vector<AggregateResult> aggregate(const std::vector<RawResult>& raw) {
  using Key = std::tuple<std::string, std::string, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RawResult*>> groups;
  for (const auto& r : raw) {
    Key key{r.algorithm, r.instance_id, r.horizon};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<AggregateResult> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    AggregateResult a;
    a.algorithm = std::get<0>(key);
    a.instance_id = std::get<1>(key);
    a.horizon = std::get<2>(key);
    a.n = rows.front()->n;
    a.reps = rows.size();
    double sum = 0.0;
    for (const auto* r : rows) sum += r->final_pseudo_regret;
    a.mean_regret = sum / static_cast<double>(a.reps);
    if (a.reps > 1) {
      double ss = 0.0;
      for (const auto* r : rows) ss += (r->final_pseudo_regret - a.mean_regret) * (r->final_pseudo_regret - a.mean_regret);
      a.std = std::sqrt(ss / static_cast<double>(a.reps - 1));
    }
    a.ci95 = 1.96 * a.std / std::sqrt(static_cast<double>(a.reps));
    out.push_back(std::move(a));
  }
  return out;
}

double fit_regret_exponent(const std::vector<AggregateResult>& results) {
  std::set<std::size_t> distinct;
  for (const auto& r : results) {
    if (!(r.mean_regret > 0.0))
      throw FitError("nonpositive mean regret at T=" + std::to_string(r.horizon) + "; log undefined");
    distinct.insert(r.horizon);
  }
  if (distinct.size() < 3) throw FitError("exponent fit needs at least 3 horizons");
  const double m = static_cast<double>(results.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& r : results) {
    sx += std::log(static_cast<double>(r.horizon));
    sy += std::log(r.mean_regret);
  }
  const double mx = sx / m, my = sy / m;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : results) {
    const double dx = std::log(static_cast<double>(r.horizon)) - mx;
    sxy += dx * (std::log(r.mean_regret) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<ExponentFit> fit_exponents(const std::vector<AggregateResult>& results) {
  using Key = std::pair<std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<AggregateResult>> groups;
  for (const auto& r : results) {
    Key key{r.algorithm, r.instance_id};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r);
  }
  std::vector<ExponentFit> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    out.push_back({key.first, key.second, rows.size(), fit_regret_exponent(rows)});
  }
  return out;
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void write_raw_csv(std::ostream& out, const std::vector<RawResult>& raw) {
  out << "algorithm,instance_id,n,T,rep,seed,final_pseudo_regret,rounds_used\n";
  for (const auto& r : raw)
    out << r.algorithm << ',' << r.instance_id << ',' << r.n << ',' << r.horizon << ',' << r.rep << ','
        << r.seed << ',' << format_double(r.final_pseudo_regret) << ',' << r.rounds_used << '\n';
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateResult>& agg) {
  out << "algorithm,instance_id,n,T,reps,mean_regret,std,ci95\n";
  for (const auto& a : agg)
    out << a.algorithm << ',' << a.instance_id << ',' << a.n << ',' << a.horizon << ',' << a.reps << ','
        << format_double(a.mean_regret) << ',' << format_double(a.std) << ',' << format_double(a.ci95)
        << '\n';
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  if (!trace.has_rounds) throw std::invalid_argument("trace was recorded without rounds");
  out << "t,action,observation,expected_utility,cum_regret\n";
  double sum = 0.0;
  for (const auto& r : trace.rounds) {
    sum += r.expected_utility;
    out << r.t << ',' << format_double(r.action) << ',' << format_double(r.observation) << ','
        << format_double(r.expected_utility) << ','
        << format_double(static_cast<double>(r.t) * trace.opt_value - sum) << '\n';
  }
}

void write_exponent_csv(std::ostream& out, const std::vector<ExponentFit>& fits) {
  out << "algorithm,instance_id,horizons,exponent\n";
  for (const auto& f : fits)
    out << f.algorithm << ',' << f.instance_id << ',' << f.horizons << ',' << format_double(f.slope) << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw CsvError("unexpected CSV header, want: " + header);
  std::vector<std::vector<std::string>> rows;
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) throw CsvError("malformed CSV row: " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

template <class T>
T parse(const std::string& s) {
  std::istringstream is(s);
  T v{};
  is >> v;
  if (!is || !is.eof()) throw CsvError("cannot parse CSV value '" + s + "'");
  return v;
}

}  // namespace

std::vector<RawResult> read_raw_csv(std::istream& in) {
  std::vector<RawResult> out;
  for (const auto& c : read_rows(in, "algorithm,instance_id,n,T,rep,seed,final_pseudo_regret,rounds_used"))
    out.push_back({c[0], c[1], parse<std::size_t>(c[2]), parse<std::size_t>(c[3]), parse<std::size_t>(c[4]),
                   parse<std::uint64_t>(c[5]), parse<double>(c[6]), parse<std::size_t>(c[7])});
  return out;
}

std::vector<AggregateResult> read_aggregate_csv(std::istream& in) {
  std::vector<AggregateResult> out;
  for (const auto& c : read_rows(in, "algorithm,instance_id,n,T,reps,mean_regret,std,ci95"))
    out.push_back({c[0], c[1], parse<std::size_t>(c[2]), parse<std::size_t>(c[3]), parse<std::size_t>(c[4]),
                   parse<double>(c[5]), parse<double>(c[6]), parse<double>(c[7])});
  return out;
}

}  // namespace bwmj::harness
