#include "bwmj/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace bwmj::env {

namespace {

constexpr double kTol = kValidationTolerance;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConstructionError(what);
}

void check_probability_vector(const std::vector<double>& p, const std::string& what) {
  double total = 0.0;
  for (double x : p) {
    require(std::isfinite(x) && x >= 0.0, what + " has a negative or non-finite entry");
    total += x;
  }
  require(std::abs(total - 1.0) <= kTol, what + " does not sum to 1");
}

// Outcome law with sorted support and equal reward values merged.
RewardDistribution outcome_law(const std::vector<std::pair<double, double>>& weighted) {
  std::map<double, double> merged;
  for (const auto& [value, prob] : weighted) merged[value] += prob;
  std::vector<double> values, probs;
  for (const auto& [value, prob] : merged) {
    values.push_back(value);
    probs.push_back(prob);
  }
  return RewardDistribution::discrete(std::move(values), std::move(probs));
}

RewardDistribution outcome_law(const ContractProblem& p, std::size_t action) {
  std::vector<std::pair<double, double>> w;
  for (std::size_t j = 0; j < p.rewards.size(); ++j)
    w.emplace_back(p.rewards[j], p.outcome_distributions[action][j]);
  return outcome_law(w);
}

std::string action_name(std::size_t zero_based) {
  return "action " + std::to_string(zero_based + 1);
}

}  // namespace

double ContractProblem::expected_reward(std::size_t action) const {
  const auto& f = outcome_distributions.at(action);
  double r = 0.0;
  for (std::size_t j = 0; j < rewards.size(); ++j) r += f[j] * rewards[j];
  return r;
}

void check(const ContractProblem& p) {
  require(!p.costs.empty(), "contract problem needs at least one action");
  require(!p.rewards.empty(), "contract problem needs at least one outcome");
  require(p.outcome_distributions.size() == p.costs.size(),
          "one outcome distribution per action is required");
  for (double r : p.rewards) require(std::isfinite(r) && r >= 0.0 && r <= 1.0, "rewards must lie in [0,1]");
  for (std::size_t i = 0; i < p.costs.size(); ++i) {
    require(p.outcome_distributions[i].size() == p.rewards.size(),
            action_name(i) + " distribution length differs from outcome count");
    check_probability_vector(p.outcome_distributions[i], action_name(i) + " distribution");
    require(std::isfinite(p.costs[i]) && p.costs[i] >= 0.0 && p.costs[i] <= 1.0,
            action_name(i) + " cost outside [0,1]");
  }
  require(p.costs[0] == 0.0, "action 1 must have zero cost");
}

std::vector<BestResponseSegment> best_response_partition(const std::vector<double>& R,
                                                         const std::vector<double>& c) {
  const std::size_t n = R.size();
  if (n == 0 || c.size() != n) throw std::invalid_argument("best_response_partition: size mismatch");

  // Best response at rho = 0: max -c, then max R, then lowest index.
  std::size_t cur = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (c[i] < c[cur] || (c[i] == c[cur] && R[i] > R[cur])) cur = i;
  }
  std::vector<BestResponseSegment> segs{{0.0, 1.0, cur}};
  double here = 0.0;
  for (;;) {
    std::size_t next = n;
    double at = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n; ++b) {
      if (!(R[b] > R[cur])) continue;
      const double cross = std::max(here, (c[b] - c[cur]) / (R[b] - R[cur]));
      if (next == n || cross < at || (cross == at && R[b] > R[next])) {
        at = cross;
        next = b;
      }
    }
    if (next == n || at >= 1.0) break;
    if (at == here) {
      // `next` already ties `cur` at the current point, so it wins there.
      segs.back().action = next;
    } else {
      segs.back().end = at;
      segs.push_back({at, 1.0, next});
      here = at;
    }
    cur = next;
  }
  return segs;
}

Reduction contract_to_canonical(const ContractProblem& p, std::string id) {
  check(p);
  const std::size_t n = p.num_actions();

  // Collapse exact duplicates (same law, same cost) onto the first copy.
  std::vector<std::size_t> alias(n);
  std::iota(alias.begin(), alias.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (alias[j] != j) continue;
      bool same = std::abs(p.costs[i] - p.costs[j]) <= kTol;
      for (std::size_t o = 0; same && o < p.rewards.size(); ++o)
        same = std::abs(p.outcome_distributions[i][o] - p.outcome_distributions[j][o]) <= kTol;
      if (same) {
        alias[i] = j;
        break;
      }
    }
  }
  std::vector<std::size_t> unique;
  std::vector<double> R, c;
  for (std::size_t i = 0; i < n; ++i) {
    if (alias[i] != i) continue;
    unique.push_back(i);
    R.push_back(p.expected_reward(i));
    c.push_back(p.costs[i]);
  }

  const auto segs = best_response_partition(R, c);
  std::vector<bool> used(unique.size(), false);
  for (const auto& s : segs) used[s.action] = true;
  for (std::size_t u = 0; u < unique.size(); ++u) {
    if (!used[u]) throw ConstructionError(action_name(unique[u]) + " not implementable");
  }

  Reduction out;
  out.mapping = NativeMapping{"contract", 0.0, 1.0};
  std::vector<double> breakpoints;
  std::vector<RewardDistribution> laws;
  for (const auto& s : segs) {
    breakpoints.push_back(s.start);
    laws.push_back(outcome_law(p, unique[s.action]));
    out.interval_source.push_back(unique[s.action]);
  }
  breakpoints.push_back(1.0);
  try {
    out.instance = make_instance(std::move(id), std::move(breakpoints), std::move(laws), {1.0, 0.0});
  } catch (const InvalidInstance& e) {
    throw ConstructionError(std::string("contract reduction left the canonical class: ") + e.what());
  }
  return out;
}

void check(const BayesianContractProblem& p) {
  require(!p.types.empty(), "bayesian contract problem needs at least one type");
  require(p.type_distribution.size() == p.types.size(), "one type probability per type is required");
  check_probability_vector(p.type_distribution, "type distribution");
  for (const auto& t : p.types) check(t);
}

BayesianReduction bayesian_contract_to_canonical(const BayesianContractProblem& p, std::string id) {
  check(p);
  const std::size_t d = p.types.size();

  std::vector<std::vector<BestResponseSegment>> partitions;
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& t : p.types) {
    std::vector<double> R(t.num_actions());
    for (std::size_t i = 0; i < R.size(); ++i) R[i] = t.expected_reward(i);
    partitions.push_back(best_response_partition(R, t.costs));
    for (const auto& s : partitions.back()) cuts.push_back(s.start);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> cells{cuts.front()};
  for (double x : cuts) {
    if (x - cells.back() > kTol) cells.push_back(x);
  }
  if (1.0 - cells.back() <= kTol) cells.back() = 1.0;
  else cells.push_back(1.0);

  auto action_at = [](const std::vector<BestResponseSegment>& segs, double rho) {
    for (const auto& s : segs) {
      if (rho >= s.start && rho < s.end) return s.action;
    }
    return segs.back().action;
  };

  BayesianReduction out;
  std::vector<double> starts;
  for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
    const double mid = 0.5 * (cells[k] + cells[k + 1]);
    std::vector<std::size_t> profile(d);
    for (std::size_t t = 0; t < d; ++t) profile[t] = action_at(partitions[t], mid);
    if (!out.profiles.empty() && out.profiles.back() == profile) continue;
    out.profiles.push_back(std::move(profile));
    starts.push_back(cells[k]);
  }

  std::vector<RewardDistribution> laws;
  for (const auto& profile : out.profiles) {
    std::vector<std::pair<double, double>> w;
    for (std::size_t t = 0; t < d; ++t) {
      const auto& body = p.types[t];
      for (std::size_t j = 0; j < body.rewards.size(); ++j)
        w.emplace_back(body.rewards[j],
                       p.type_distribution[t] * body.outcome_distributions[profile[t]][j]);
    }
    laws.push_back(outcome_law(w));
  }
  for (std::size_t i = 0; i + 1 < laws.size(); ++i) {
    if (!(laws[i].mean() < laws[i + 1].mean())) {
      std::ostringstream os;
      os << "mixture means not strictly increasing across the cell boundary at " << starts[i + 1];
      throw ConstructionError(os.str());
    }
  }
  starts.push_back(1.0);
  out.reduction.mapping = NativeMapping{"contract", 0.0, 1.0};
  out.reduction.interval_source.resize(out.profiles.size());
  std::iota(out.reduction.interval_source.begin(), out.reduction.interval_source.end(), 0);
  try {
    out.reduction.instance = make_instance(std::move(id), std::move(starts), std::move(laws), {1.0, 0.0});
  } catch (const InvalidInstance& e) {
    throw ConstructionError(std::string("bayesian reduction left the canonical class: ") + e.what());
  }
  return out;
}

void check(const PostedPriceProblem& p) {
  require(!p.valuations.empty(), "posted-price problem needs at least one valuation");
  require(p.valuations.size() == p.probabilities.size(), "one probability per valuation is required");
  for (std::size_t i = 0; i < p.valuations.size(); ++i) {
    require(p.valuations[i] > 0.0 && p.valuations[i] < 1.0, "valuations must lie in (0,1)");
    require(p.probabilities[i] > 0.0, "valuation probabilities must be positive");
    if (i > 0) require(p.valuations[i - 1] < p.valuations[i], "valuations must be strictly increasing");
  }
  check_probability_vector(p.probabilities, "valuation distribution");
}

Reduction posted_price_to_canonical(const PostedPriceProblem& p, std::string id) {
  check(p);
  const std::size_t n = p.valuations.size();
  // Price interval (v_{i-1}, v_i] sells with probability P{v >= v_i}; the
  // mirrored interval is [1 - v_i, 1 - v_{i-1}).
  std::vector<double> breakpoints{0.0};
  std::vector<RewardDistribution> laws{RewardDistribution::bernoulli(0.0)};
  Reduction out;
  out.interval_source.push_back(n);  // price above every valuation
  double tail = 0.0;
  for (std::size_t r = n; r-- > 0;) {
    tail += p.probabilities[r];
    breakpoints.push_back(1.0 - p.valuations[r]);
    laws.push_back(RewardDistribution::bernoulli(std::min(1.0, tail)));
    out.interval_source.push_back(r);
  }
  breakpoints.push_back(1.0);
  out.mapping = NativeMapping{"price", 1.0, -1.0};
  try {
    out.instance = make_instance(std::move(id), std::move(breakpoints), std::move(laws), {1.0, 0.0});
  } catch (const InvalidInstance& e) {
    throw ConstructionError(std::string("posted-price reduction left the canonical class: ") + e.what());
  }
  return out;
}

void check(const FirstPriceProblem& p) {
  require(p.valuation > 0.0 && p.valuation <= 1.0, "own valuation must lie in (0,1]");
  require(!p.competitor_bids.empty(), "competitor bid law needs at least one atom");
  require(p.competitor_bids.size() == p.probabilities.size(), "one probability per atom is required");
  for (std::size_t i = 0; i < p.competitor_bids.size(); ++i) {
    const double m = p.competitor_bids[i];
    require(m >= 0.0 && m <= 1.0, "competitor bids must lie in [0,1]");
    require(p.probabilities[i] > 0.0, "atom probabilities must be positive");
    if (i > 0) require(p.competitor_bids[i - 1] < m, "competitor bid atoms must be strictly increasing");
  }
  check_probability_vector(p.probabilities, "competitor bid distribution");
}

Reduction first_price_to_canonical(const FirstPriceProblem& p, std::string id) {
  check(p);
  const double v = p.valuation;
  Reduction out;
  std::vector<double> breakpoints;
  std::vector<RewardDistribution> laws;
  double win = 0.0;
  std::size_t i = 0;
  // Atoms at zero are won by every bid.
  for (; i < p.competitor_bids.size() && p.competitor_bids[i] == 0.0; ++i) win += p.probabilities[i];
  if (win > 0.0) {
    breakpoints.push_back(0.0);
    laws.push_back(RewardDistribution::bernoulli(std::min(1.0, win)));
    out.interval_source.push_back(i - 1);
  }
  for (; i < p.competitor_bids.size() && p.competitor_bids[i] < v; ++i) {
    if (breakpoints.empty()) {
      breakpoints.push_back(0.0);
      laws.push_back(RewardDistribution::bernoulli(0.0));
      out.interval_source.push_back(p.competitor_bids.size());
    }
    win += p.probabilities[i];
    breakpoints.push_back(p.competitor_bids[i] / v);
    laws.push_back(RewardDistribution::bernoulli(std::min(1.0, win)));
    out.interval_source.push_back(i);
  }
  if (win <= 0.0) throw ConstructionError("no winnable bid below the own valuation");
  breakpoints.push_back(1.0);
  out.mapping = NativeMapping{"bid", 0.0, v};
  try {
    out.instance = make_instance(std::move(id), std::move(breakpoints), std::move(laws), {v, 0.0});
  } catch (const InvalidInstance& e) {
    throw ConstructionError(std::string("first-price reduction left the canonical class: ") + e.what());
  }
  return out;
}

LowerBoundPair lower_bound_pair(std::size_t n, std::size_t horizon, std::size_t i_star) {
  if (n < 3) throw std::invalid_argument("lower-bound pair needs n >= 3");
  if (horizon == 0 || n * n * n > horizon)
    throw std::invalid_argument("lower-bound pair needs n <= T^(1/3)");
  if (i_star <= 2 || i_star > n)
    throw std::invalid_argument("perturbed action must satisfy 2 < i* <= n");

  LowerBoundPair out;
  out.horizon = horizon;
  out.perturbed_action = i_star;
  out.k = kLowerBoundK;
  const double eps = std::sqrt(static_cast<double>(n) / (16.0 * static_cast<double>(horizon)));
  out.epsilon = eps;
  const double k = out.k;
  if (eps * static_cast<double>(n) > 0.25) throw std::invalid_argument("lower-bound pair needs eps * n <= 1/4");

  // 1-based indexing below follows the action numbering of the construction.
  auto first_outcome = [&](std::size_t i) { return 0.5 + eps * static_cast<double>(i - 2); };
  out.thresholds.assign(n, 0.0);
  for (std::size_t i = 2; i <= n; ++i) out.thresholds[i - 1] = 1.0 - 1.0 / (first_outcome(i) * k);

  auto build = [&](bool perturbed) {
    ContractProblem p;
    p.rewards = {1.0, 0.0};
    std::vector<double> f1(n + 1, 0.0);  // f1[i] = F_{i,1}
    f1[1] = 0.0;
    f1[2] = 0.5 + 0.5 * eps;
    for (std::size_t i = 3; i <= n; ++i) f1[i] = first_outcome(i);
    if (perturbed) f1[i_star] = 0.5 + eps * static_cast<double>(i_star - 1);
    // Costs follow the (possibly perturbed) laws through the same recursion,
    // so in P' actions i* and i*+1 coincide when i* < n.
    std::vector<double> c(n + 1, 0.0);
    c[2] = (1.0 + eps) * (0.5 - 1.0 / k);
    for (std::size_t i = 3; i <= n; ++i) c[i] = c[i - 1] + out.thresholds[i - 1] * (f1[i] - f1[i - 1]);
    for (std::size_t i = 1; i <= n; ++i) {
      p.outcome_distributions.push_back({f1[i], 1.0 - f1[i]});
      p.costs.push_back(c[i]);
    }
    return p;
  };
  out.base_problem = build(false);
  out.perturbed_problem = build(true);
  const std::string tag = "lower-bound-n" + std::to_string(n) + "-T" + std::to_string(horizon) +
                          "-i" + std::to_string(i_star);
  out.base = contract_to_canonical(out.base_problem, tag + "-base").instance;
  out.perturbed = contract_to_canonical(out.perturbed_problem, tag + "-perturbed").instance;
  return out;
}

CanonicalInstance random_instance(std::size_t n, Rng& rng, const RandomInstanceParams& params,
                                  std::string id) {
  if (n == 0) throw std::invalid_argument("random instance needs n >= 1");
  if (!(params.gap_min > 0.0) || params.gap_min > params.gap_max)
    throw std::invalid_argument("gap range must satisfy 0 < gap_min <= gap_max");
  const double jumps = static_cast<double>(n - 1);
  if (jumps * params.gap_min > 1.0) throw std::invalid_argument("infeasible gap range: minimum gaps exceed 1");

  std::vector<double> breakpoints{0.0, 1.0};
  while (breakpoints.size() < n + 1) {
    const double b = uniform01(rng);
    if (b <= 0.0 || std::find(breakpoints.begin(), breakpoints.end(), b) != breakpoints.end()) continue;
    breakpoints.push_back(b);
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  std::vector<double> gaps(n - 1);
  double total = 0.0;
  for (auto& g : gaps) {
    g = params.gap_min + (params.gap_max - params.gap_min) * uniform01(rng);
    total += g;
  }
  if (total > 1.0) {
    const double excess = total - jumps * params.gap_min;
    const double room = 1.0 - jumps * params.gap_min;
    for (auto& g : gaps) g = params.gap_min + (g - params.gap_min) * room / excess;
    total = 1.0;
  }
  std::vector<double> means(n);
  means[0] = std::max(0.0, 1.0 - total) * uniform01(rng);
  for (std::size_t i = 1; i < n; ++i) means[i] = std::min(1.0, means[i - 1] + gaps[i - 1]);

  std::vector<RewardDistribution> laws;
  for (double mu : means) {
    switch (params.kind) {
      case RewardDistribution::Kind::PointMass:
        laws.push_back(RewardDistribution::point_mass(mu));
        break;
      case RewardDistribution::Kind::Bernoulli:
        laws.push_back(RewardDistribution::bernoulli(mu));
        break;
      case RewardDistribution::Kind::Discrete: {
        const double lo = std::max(0.0, 2.0 * mu - 1.0);
        const double hi = std::min(1.0, 2.0 * mu);
        laws.push_back(RewardDistribution::discrete({lo, hi}, {0.5, 0.5}));
        break;
      }
    }
  }
  return make_instance(std::move(id), std::move(breakpoints), std::move(laws), params.linear_factor);
}

ContractProblem random_contract_problem(std::size_t actions, std::size_t outcomes, Rng& rng) {
  if (actions == 0 || outcomes < 2) throw std::invalid_argument("need >= 1 action and >= 2 outcomes");
  ContractProblem p;
  for (std::size_t j = 0; j < outcomes; ++j) p.rewards.push_back(uniform01(rng));

  struct Row {
    std::vector<double> f;
    double reward;
  };
  std::vector<Row> rows;
  while (rows.size() < actions) {
    std::vector<double> f(outcomes);
    double s = 0.0;
    for (auto& x : f) {
      x = -std::log(1.0 - uniform01(rng));  // flat Dirichlet
      s += x;
    }
    for (auto& x : f) x /= s;
    // Renormalize through the last entry so the vector sums to 1 exactly.
    f.back() = 1.0 - std::accumulate(f.begin(), f.end() - 1, 0.0);
    if (f.back() < 0.0) continue;
    double r = 0.0;
    for (std::size_t j = 0; j < outcomes; ++j) r += f[j] * p.rewards[j];
    bool distinct = true;
    for (const auto& other : rows) distinct = distinct && std::abs(other.reward - r) > 1e-6;
    if (distinct) rows.push_back({std::move(f), r});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.reward < b.reward; });

  // Switch points beta_2 < ... < beta_n make action i the unique best
  // response on [beta_i, beta_{i+1}).
  std::vector<double> beta;
  while (beta.size() + 1 < actions) {
    const double b = uniform01(rng);
    if (b > 1e-3 && b < 1.0 - 1e-3) beta.push_back(b);
  }
  std::sort(beta.begin(), beta.end());
  std::vector<double> costs(actions, 0.0);
  for (std::size_t i = 1; i < actions; ++i)
    costs[i] = costs[i - 1] + beta[i - 1] * (rows[i].reward - rows[i - 1].reward);

  // Shuffle all but the zero-cost action.
  std::vector<std::size_t> order(actions);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = actions; i > 2; --i) {
    const auto j = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i - 1));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  for (std::size_t idx : order) {
    p.outcome_distributions.push_back(rows[idx].f);
    p.costs.push_back(costs[idx]);
  }
  return p;
}

PostedPriceProblem random_posted_price_problem(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("need at least one valuation");
  PostedPriceProblem p;
  while (p.valuations.size() < n) {
    const double v = uniform01(rng);
    if (v <= 1e-6 || v >= 1.0 - 1e-6) continue;
    if (std::find(p.valuations.begin(), p.valuations.end(), v) != p.valuations.end()) continue;
    p.valuations.push_back(v);
  }
  std::sort(p.valuations.begin(), p.valuations.end());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.probabilities.push_back(0.05 + uniform01(rng));
    s += p.probabilities.back();
  }
  for (auto& q : p.probabilities) q /= s;
  return p;
}

FirstPriceProblem random_first_price_problem(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("need at least one atom");
  FirstPriceProblem p;
  p.valuation = 0.3 + 0.7 * uniform01(rng);
  while (p.competitor_bids.size() < n) {
    // Keep the lowest atom below the valuation so some bid is winnable.
    double m = uniform01(rng);
    if (p.competitor_bids.empty()) m *= p.valuation * 0.9;
    if (std::find(p.competitor_bids.begin(), p.competitor_bids.end(), m) != p.competitor_bids.end()) continue;
    p.competitor_bids.push_back(m);
  }
  std::sort(p.competitor_bids.begin(), p.competitor_bids.end());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.probabilities.push_back(0.05 + uniform01(rng));
    s += p.probabilities.back();
  }
  for (auto& q : p.probabilities) q /= s;
  return p;
}

}  // namespace bwmj::env
