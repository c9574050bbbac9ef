#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "bwmj/environments.hpp"
#include "bwmj/io.hpp"

namespace bwmj::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

// Reported as "error: <what>" with exit code 1.
struct CommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerateOpts {
  std::string kind;
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::size_t i_star = 0;
  std::uint64_t seed = 0;
  std::vector<double> valuations;
  std::vector<double> probs;
  std::vector<double> bids;
  double valuation = 1.0;
  std::string problem;
  std::string distribution = "bernoulli";
  double gap_min = 0.05;
  double gap_max = 0.2;
  std::string id;
  std::string out;
};

struct ValidateOpts {
  std::string file;
  bool deep = false;
};

struct RunOpts {
  std::string instance;
  std::string algorithm;
  std::vector<std::size_t> horizons;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  std::optional<double> gamma;
  std::size_t grid_size = 0;
  std::size_t workers = 1;
  bool trace = false;
  std::string out;
};

struct SweepOpts {
  std::string config;
  std::optional<std::size_t> workers;
  std::string out;
};

struct ReportOpts {
  std::string raw;
  std::string aggregate;
};

std::string path_with_suffix(const std::string& out, const std::string& suffix) {
  std::string base = out;
  if (base.size() > 5 && base.compare(base.size() - 5, 5, ".json") == 0) base.resize(base.size() - 5);
  return base + suffix;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_reduction(const env::Reduction& red, const std::string& out, std::ostream& log) {
  ensure_parent(out);
  io::save_instance(out, red.instance);
  const std::string sidecar = path_with_suffix(out, ".mapping.json");
  io::write_json(sidecar, {{"instance", fs::path(out).filename().string()},
                           {"mapping", io::to_json(red.mapping)},
                           {"interval_source", red.interval_source}});
  log << "wrote " << out << "\nwrote " << sidecar << '\n';
}

int cmd_generate(const GenerateOpts& o, std::ostream& out) {
  Rng rng(o.seed);
  const std::string& kind = o.kind;
  auto need_n = [&] {
    if (o.n == 0) throw CommandError("--n is required for --kind " + kind);
  };

  if (kind == "random") {
    need_n();
    env::RandomInstanceParams params;
    params.gap_min = o.gap_min;
    params.gap_max = o.gap_max;
    if (o.distribution == "bernoulli")
      params.kind = RewardDistribution::Kind::Bernoulli;
    else if (o.distribution == "point_mass")
      params.kind = RewardDistribution::Kind::PointMass;
    else if (o.distribution == "discrete")
      params.kind = RewardDistribution::Kind::Discrete;
    else
      throw CommandError("unknown distribution '" + o.distribution + "'");
    const auto inst = env::random_instance(o.n, rng, params, o.id.empty() ? "random" : o.id);
    ensure_parent(o.out);
    io::save_instance(o.out, inst);
    out << "wrote " << o.out << '\n';
    return 0;
  }

  if (kind == "contract") {
    env::ContractProblem p;
    if (!o.problem.empty())
      p = io::contract_from_json(io::read_json(o.problem));
    else {
      need_n();
      p = env::random_contract_problem(o.n, 3, rng);
    }
    write_reduction(env::contract_to_canonical(p, o.id.empty() ? "contract" : o.id), o.out, out);
    return 0;
  }

  if (kind == "bayesian-contract") {
    if (o.problem.empty()) throw CommandError("--problem is required for --kind bayesian-contract");
    const auto p = io::bayesian_contract_from_json(io::read_json(o.problem));
    const auto red = env::bayesian_contract_to_canonical(p, o.id.empty() ? "bayesian-contract" : o.id);
    write_reduction(red.reduction, o.out, out);
    return 0;
  }

  if (kind == "posted-price") {
    env::PostedPriceProblem p;
    if (!o.problem.empty())
      p = io::posted_price_from_json(io::read_json(o.problem));
    else if (!o.valuations.empty())
      p = {o.valuations, o.probs};
    else {
      need_n();
      p = env::random_posted_price_problem(o.n, rng);
    }
    write_reduction(env::posted_price_to_canonical(p, o.id.empty() ? "posted-price" : o.id), o.out, out);
    return 0;
  }

  if (kind == "first-price") {
    env::FirstPriceProblem p;
    if (!o.problem.empty())
      p = io::first_price_from_json(io::read_json(o.problem));
    else if (!o.bids.empty())
      p = {o.valuation, o.bids, o.probs};
    else {
      need_n();
      p = env::random_first_price_problem(o.n, rng);
    }
    write_reduction(env::first_price_to_canonical(p, o.id.empty() ? "first-price" : o.id), o.out, out);
    return 0;
  }

  if (kind == "lower-bound-pair") {
    if (o.n == 0 || o.horizon == 0 || o.i_star == 0)
      throw CommandError("--n, --t and --i-star are required for --kind lower-bound-pair");
    const auto pair = env::lower_bound_pair(o.n, o.horizon, o.i_star);
    const std::string base = path_with_suffix(o.out, ".base.json");
    const std::string perturbed = path_with_suffix(o.out, ".perturbed.json");
    const std::string sidecar = path_with_suffix(o.out, ".pair.json");
    ensure_parent(base);
    io::save_instance(base, pair.base);
    io::save_instance(perturbed, pair.perturbed);
    io::write_json(sidecar, {{"kind", "lower-bound-pair"},
                             {"base", fs::path(base).filename().string()},
                             {"perturbed", fs::path(perturbed).filename().string()},
                             {"n", o.n},
                             {"T", o.horizon},
                             {"i_star", o.i_star},
                             {"epsilon", pair.epsilon},
                             {"k", pair.k},
                             {"thresholds", pair.thresholds},
                             {"base_problem", io::to_json(pair.base_problem)},
                             {"perturbed_problem", io::to_json(pair.perturbed_problem)}});
    out << "wrote " << base << "\nwrote " << perturbed << "\nwrote " << sidecar << '\n';
    return 0;
  }

  throw CommandError("unknown --kind '" + kind + "'");
}

// Deep check of a lower-bound pair sidecar against the closed forms.
int validate_pair(const fs::path& sidecar, const json& j, std::ostream& out, std::ostream& err) {
  const auto dir = sidecar.parent_path();
  const auto base = io::load_instance(dir / j.at("base").get<std::string>());
  const auto perturbed = io::load_instance(dir / j.at("perturbed").get<std::string>());
  const double eps = j.at("epsilon").get<double>();
  const double k = j.at("k").get<double>();
  const auto i_star = j.at("i_star").get<std::size_t>();
  const auto thresholds = j.at("thresholds").get<std::vector<double>>();

  int failures = 0;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      err << "error: " << what << '\n';
      ++failures;
    }
  };
  const auto opt = optimum(base);
  const auto opt_p = optimum(perturbed);
  expect(std::abs(opt.value - (1.0 + eps) / k) <= 1e-12, "base OPT differs from (1+eps)/k");
  expect(std::abs(opt.action - thresholds[1]) <= 1e-12, "base optimum not at alpha_2");
  // The instance's own breakpoint, which may sit an ulp off the closed form.
  const double a_star = perturbed.breakpoints[i_star - 1];
  expect(std::abs(a_star - thresholds[i_star - 1]) <= 1e-12, "perturbed breakpoint drifted from alpha_i*");
  const double u_star = expected_utility(perturbed, a_star);
  expect(u_star >= (1.0 + 4.0 * eps / 3.0) / k, "perturbed u(alpha_i*) below (1 + 4eps/3)/k");
  expect(std::abs(opt_p.action - thresholds[i_star - 1]) <= 1e-12, "perturbed optimum not at alpha_i*");
  out << std::setprecision(17) << "pair " << base.id << " / " << perturbed.id << ": OPT " << opt.value << " vs "
      << opt_p.value << (failures ? " FAILED" : " ok") << '\n';
  return failures ? 1 : 0;
}

int cmd_validate(const ValidateOpts& o, std::ostream& out, std::ostream& err) {
  const json j = io::read_json(o.file);
  if (j.is_object() && j.value("kind", "") == "lower-bound-pair") {
    if (!o.deep) {
      out << "lower-bound pair sidecar; use --deep to check it\n";
      return 0;
    }
    return validate_pair(o.file, j, out, err);
  }
  CanonicalInstance inst;
  try {
    inst = io::instance_from_json(j);
  } catch (const InvalidInstance& e) {
    for (const auto& v : e.violations()) err << "error: " << v << '\n';
    return 1;
  }
  const auto opt = optimum(inst);
  out << std::setprecision(17) << "ok: " << inst.id << " n=" << inst.size() << " OPT=" << opt.value
      << " at alpha=" << opt.action << '\n';
  if (o.deep) {
    // Grid scan over 10^5 points plus the breakpoints.
    double best = -1.0;
    for (std::size_t i = 0; i <= 100000; ++i) best = std::max(best, expected_utility(inst, i / 100000.0));
    for (double b : inst.breakpoints) best = std::max(best, expected_utility(inst, b));
    if (std::abs(best - opt.value) > 1e-12) {
      err << "error: grid maximum " << best << " disagrees with OPT\n";
      return 1;
    }
    out << "deep: grid maximum agrees\n";
  }
  return 0;
}

harness::AlgorithmSpec make_spec(const std::string& id, std::optional<double> gamma, std::size_t grid_size) {
  harness::AlgorithmSpec spec{id, 0.0, grid_size};
  if (id == "id-rji-os") {
    if (!gamma) throw CommandError("--gamma is required for --algorithm id-rji-os");
    if (!(*gamma > 0.0)) throw CommandError("--gamma must be positive");
    spec.gamma = *gamma;
  } else if (gamma) {
    throw CommandError("--gamma applies only to --algorithm id-rji-os");
  }
  return spec;
}

void write_results(const harness::ExperimentResult& res, const fs::path& dir, std::ostream& out) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "raw.csv");
    harness::write_raw_csv(f, res.raw);
  }
  {
    std::ofstream f(dir / "aggregate.csv");
    harness::write_aggregate_csv(f, res.aggregate);
  }
  out << "wrote " << (dir / "raw.csv").string() << "\nwrote " << (dir / "aggregate.csv").string() << '\n';
}

int cmd_run(const RunOpts& o, std::ostream& out, const harness::AlgorithmRegistry& registry) {
  harness::ExperimentConfig cfg;
  cfg.instances.push_back(io::load_instance(o.instance));
  cfg.algorithms.push_back(make_spec(o.algorithm, o.gamma, o.grid_size));
  cfg.horizons = o.horizons;
  std::sort(cfg.horizons.begin(), cfg.horizons.end());
  cfg.replications = o.reps;
  cfg.master_seed = o.seed;
  cfg.workers = o.workers;
  cfg.record_traces = o.trace;
  const auto res = harness::run_experiment(cfg, registry);
  write_results(res, o.out, out);
  if (o.trace) {
    for (std::size_t i = 0; i < res.raw.size(); ++i) {
      const auto& r = res.raw[i];
      const auto name = "trace_" + r.algorithm + "_T" + std::to_string(r.horizon) + "_rep" + std::to_string(r.rep) + ".csv";
      std::ofstream f(fs::path(o.out) / name);
      harness::write_trace_csv(f, res.traces[i]);
    }
  }
  for (const auto& a : res.aggregate)
    out << a.algorithm << " T=" << a.horizon << " mean_regret=" << harness::format_double(a.mean_regret)
        << " ci95=" << harness::format_double(a.ci95) << '\n';
  return 0;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out, const harness::AlgorithmRegistry& registry) {
  const fs::path config_path = o.config;
  const json j = io::read_json(config_path);
  if (!j.is_object()) throw CommandError("sweep config must be a JSON object");
  harness::ExperimentConfig cfg;
  try {
    for (const auto& inst : j.at("instances")) {
      if (inst.is_string())
        cfg.instances.push_back(io::load_instance(config_path.parent_path() / inst.get<std::string>()));
      else
        cfg.instances.push_back(io::instance_from_json(inst));
    }
    for (const auto& a : j.at("algorithms")) {
      std::optional<double> gamma;
      if (a.contains("gamma")) gamma = a.at("gamma").get<double>();
      cfg.algorithms.push_back(make_spec(a.at("id").get<std::string>(), gamma, a.value("grid_size", std::size_t{0})));
    }
    cfg.horizons = j.at("horizons").get<std::vector<std::size_t>>();
    cfg.replications = j.value("replications", std::size_t{1});
    cfg.master_seed = j.value("seed", std::uint64_t{0});
    cfg.workers = o.workers.value_or(j.value("workers", std::size_t{1}));
    cfg.paired_seeds = j.value("paired_seeds", false);
  } catch (const json::exception& e) {
    throw CommandError(std::string("sweep config: ") + e.what());
  }
  if (cfg.horizons.empty()) throw CommandError("sweep config: horizon list is empty");
  std::sort(cfg.horizons.begin(), cfg.horizons.end());
  std::string dir = o.out.empty() ? j.value("out", std::string("sweep-out")) : o.out;

  const auto res = harness::run_experiment(cfg, registry);
  write_results(res, dir, out);

  std::vector<harness::ExponentFit> fits;
  if (cfg.horizons.size() >= 3) {
    // Fit per group; a group with a nonpositive mean is reported, not fatal.
    std::map<std::pair<std::string, std::string>, std::vector<harness::AggregateResult>> groups;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& a : res.aggregate) {
      auto key = std::pair{a.algorithm, a.instance_id};
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(a);
    }
    for (const auto& key : order) {
      try {
        fits.push_back({key.first, key.second, groups[key].size(), harness::fit_regret_exponent(groups[key])});
      } catch (const harness::FitError& e) {
        out << "note: no exponent for " << key.first << " on " << key.second << ": " << e.what() << '\n';
      }
    }
  }
  {
    std::ofstream f(fs::path(dir) / "exponents.csv");
    harness::write_exponent_csv(f, fits);
  }
  out << "algorithm,instance_id,exponent\n";
  for (const auto& f : fits) out << f.algorithm << ',' << f.instance_id << ',' << harness::format_double(f.slope) << '\n';
  return 0;
}

int cmd_report(const ReportOpts& o, std::ostream& out, std::ostream& err) {
  std::ifstream raw_in(o.raw);
  if (!raw_in) throw CommandError("cannot open " + o.raw);
  const auto agg = harness::aggregate(harness::read_raw_csv(raw_in));
  harness::write_aggregate_csv(out, agg);
  if (o.aggregate.empty()) return 0;
  std::ifstream agg_in(o.aggregate);
  if (!agg_in) throw CommandError("cannot open " + o.aggregate);
  const auto stored = harness::read_aggregate_csv(agg_in);
  std::ostringstream a, b;
  harness::write_aggregate_csv(a, agg);
  harness::write_aggregate_csv(b, stored);
  if (a.str() != b.str()) {
    err << "error: aggregate CSV does not match totals recomputed from raw CSV\n";
    return 1;
  }
  out << "report matches " << o.aggregate << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const harness::AlgorithmRegistry& registry) {
  CLI::App app{"Bandits with monotone jumps: instances, algorithms, experiments", "bwmj"};
  app.require_subcommand(1, 1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Write a canonical instance (and sidecars) as JSON");
  g->add_option("--kind", gen.kind, "random|contract|bayesian-contract|posted-price|first-price|lower-bound-pair")
      ->required()
      ->check(CLI::IsMember({"random", "contract", "bayesian-contract", "posted-price", "first-price",
                             "lower-bound-pair"}));
  g->add_option("--n", gen.n, "Number of intervals / actions / valuations / atoms");
  g->add_option("--t", gen.horizon, "Horizon (lower-bound-pair)");
  g->add_option("--i-star", gen.i_star, "Perturbed action, 1-based (lower-bound-pair)");
  g->add_option("--seed", gen.seed, "Seed for random generators")->capture_default_str();
  g->add_option("--valuations", gen.valuations, "Posted-price valuations");
  g->add_option("--probs", gen.probs, "Probabilities for --valuations or --bids");
  g->add_option("--bids", gen.bids, "First-price competitor bid atoms");
  g->add_option("--valuation", gen.valuation, "First-price own valuation");
  g->add_option("--problem", gen.problem, "Application problem JSON");
  g->add_option("--distribution", gen.distribution, "random: bernoulli|point_mass|discrete");
  g->add_option("--gap-min", gen.gap_min, "random: smallest mean gap");
  g->add_option("--gap-max", gen.gap_max, "random: largest mean gap");
  g->add_option("--id", gen.id, "Instance id");
  g->add_option("--out", gen.out, "Output path")->required();

  ValidateOpts val;
  auto* v = app.add_subcommand("validate", "Check an instance file (or a lower-bound pair sidecar)");
  v->add_option("file", val.file)->required();
  v->add_flag("--deep", val.deep, "Cross-check OPT against brute force / closed forms");

  RunOpts runo;
  std::optional<double> gamma_value;
  auto* r = app.add_subcommand("run", "Monte Carlo replications of one algorithm on one instance");
  r->add_option("--instance", runo.instance)->required();
  r->add_option("--algorithm", runo.algorithm)->required()->check(CLI::IsMember(registry.ids()));
  r->add_option("--t", runo.horizons, "Horizon(s)")->required();
  r->add_option("--reps", runo.reps)->capture_default_str();
  r->add_option("--seed", runo.seed, "Master seed")->capture_default_str();
  r->add_option("--gamma", gamma_value, "Minimum jump gap (id-rji-os only)");
  r->add_option("--grid-size", runo.grid_size, "ucb1-grid resolution, 0 = ceil(T^(1/3))");
  r->add_option("--workers", runo.workers)->capture_default_str();
  r->add_flag("--trace", runo.trace, "Write per-round trace CSVs");
  r->add_option("--out", runo.out, "Output directory")->required();

  SweepOpts sw;
  std::optional<std::size_t> sweep_workers;
  auto* s = app.add_subcommand("sweep", "Multi-horizon experiment from a JSON config");
  s->add_option("config", sw.config)->required();
  s->add_option("--workers", sweep_workers);
  s->add_option("--out", sw.out, "Output directory (overrides the config)");

  ReportOpts rep;
  auto* p = app.add_subcommand("report", "Recompute aggregates from a raw CSV");
  p->add_option("--raw", rep.raw)->required();
  p->add_option("--aggregate", rep.aggregate, "Aggregate CSV to compare against");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*v) return cmd_validate(val, out, err);
    if (*r) {
      runo.gamma = gamma_value;
      return cmd_run(runo, out, registry);
    }
    if (*s) {
      sw.workers = sweep_workers;
      return cmd_sweep(sw, out, registry);
    }
    if (*p) return cmd_report(rep, out, err);
  } catch (const InvalidInstance& e) {
    for (const auto& viol : e.violations()) err << "error: " << viol << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace bwmj::cli
