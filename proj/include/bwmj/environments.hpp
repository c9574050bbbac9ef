#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwmj/instance.hpp"
#include "bwmj/rng.hpp"

namespace bwmj::env {

// Thrown when an application problem cannot be compiled into a valid
// canonical instance.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Affine map from a canonical action alpha to the application's native unit
// (contract share, posted price, bid): native = offset + scale * alpha.
struct NativeMapping {
  std::string unit = "alpha";
  double offset = 0.0;
  double scale = 1.0;

  double to_native(double alpha) const noexcept { return offset + scale * alpha; }
  double to_alpha(double native) const noexcept { return (native - offset) / scale; }
};

struct Reduction {
  CanonicalInstance instance;
  NativeMapping mapping;
  // Source-model label of every canonical interval (best-response action,
  // valuation index, ...), zero-based.
  std::vector<std::size_t> interval_source;
};

// ---------------------------------------------------------------------------
// Hidden-action principal-agent problems under linear contracts.

struct ContractProblem {
  std::vector<double> rewards;                             // r_j, one per outcome
  std::vector<std::vector<double>> outcome_distributions;  // F_i over outcomes
  std::vector<double> costs;                               // c_i, c_1 = 0

  std::size_t num_actions() const noexcept { return costs.size(); }
  double expected_reward(std::size_t action) const;
};

// Throws ConstructionError when shapes, probability vectors or c_1 = 0 fail.
void check(const ContractProblem& problem);

// One piece of the agent's best-response map: `action` on [start, end).
struct BestResponseSegment {
  double start = 0.0;
  double end = 1.0;
  std::size_t action = 0;
};

// Upper envelope of rho -> rho * R_i - c_i on [0,1] with ties broken toward
// the larger R_i. Actions with identical (R_i, c_i) keep the lowest index.
std::vector<BestResponseSegment> best_response_partition(const std::vector<double>& expected_rewards,
                                                         const std::vector<double>& costs);

// Canonical instance with one interval per best-response region and
// l(rho) = 1 - rho. Actions identical in both outcome law and cost collapse
// into the lowest-indexed copy. Any remaining action without a
// positive-width region raises ConstructionError.
Reduction contract_to_canonical(const ContractProblem& problem, std::string id = "contract");

struct BayesianContractProblem {
  std::vector<ContractProblem> types;
  std::vector<double> type_distribution;
};

void check(const BayesianContractProblem& problem);

// Overlays the per-type best-response partitions; each cell's feedback law
// is the type mixture of the best-response outcome laws. Adjacent cells with
// the same best-response profile are merged. `profiles` holds, per canonical
// interval, the action chosen by each type.
struct BayesianReduction {
  Reduction reduction;
  std::vector<std::vector<std::size_t>> profiles;
};

BayesianReduction bayesian_contract_to_canonical(const BayesianContractProblem& problem,
                                                 std::string id = "bayesian-contract");

// ---------------------------------------------------------------------------
// Posted-price auctions with finitely many buyer valuations.

struct PostedPriceProblem {
  std::vector<double> valuations;     // strictly increasing, in (0,1)
  std::vector<double> probabilities;  // positive, sum to 1
};

void check(const PostedPriceProblem& problem);

// Mirrors alpha = 1 - p so sale probabilities increase with alpha.
Reduction posted_price_to_canonical(const PostedPriceProblem& problem,
                                    std::string id = "posted-price");

// ---------------------------------------------------------------------------
// First-price auctions with a fixed own valuation.

struct FirstPriceProblem {
  double valuation = 1.0;              // v in (0,1]
  std::vector<double> competitor_bids;  // atoms of the highest competing bid
  std::vector<double> probabilities;
};

void check(const FirstPriceProblem& problem);

// Bids restricted to [0, v] and rescaled b = v * alpha, so l(alpha) = v(1 - alpha).
// Atoms at or above v never yield positive utility and are dropped; ties
// b = m are won.
Reduction first_price_to_canonical(const FirstPriceProblem& problem,
                                   std::string id = "first-price");

// ---------------------------------------------------------------------------
// Hard instance pair used by the minimax lower bound.

struct LowerBoundPair {
  ContractProblem base_problem;
  ContractProblem perturbed_problem;
  CanonicalInstance base;
  CanonicalInstance perturbed;
  double epsilon = 0.0;
  double k = 0.0;
  std::size_t perturbed_action = 0;  // 1-based, > 2
  std::size_t horizon = 0;
  // Contract thresholds alpha_1 = 0, alpha_i = 1 - 1 / ((1/2 + eps (i-2)) k).
  std::vector<double> thresholds;
};

inline constexpr double kLowerBoundK = 21.0 / 10.0;

// n >= 3, n^3 <= horizon, 2 < perturbed_action <= n; throws
// std::invalid_argument otherwise.
LowerBoundPair lower_bound_pair(std::size_t n, std::size_t horizon, std::size_t perturbed_action);

// ---------------------------------------------------------------------------
// Random generators for test corpora.

struct RandomInstanceParams {
  double gap_min = 0.05;
  double gap_max = 0.2;
  RewardDistribution::Kind kind = RewardDistribution::Kind::Bernoulli;
  LinearFactor linear_factor{1.0, 0.0};
};

CanonicalInstance random_instance(std::size_t n, Rng& rng, const RandomInstanceParams& params = {},
                                  std::string id = "random");

// Every action implementable by construction.
ContractProblem random_contract_problem(std::size_t actions, std::size_t outcomes, Rng& rng);
PostedPriceProblem random_posted_price_problem(std::size_t n, Rng& rng);
FirstPriceProblem random_first_price_problem(std::size_t n, Rng& rng);

}  // namespace bwmj::env
