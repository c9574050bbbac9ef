#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwmj/rng.hpp"

namespace bwmj {

inline constexpr double kValidationTolerance = 1e-12;

// Strictly decreasing linear map [0,1] -> [0,1], stored by its endpoint
// values so that evaluation is exact at both 0 and 1.
struct LinearFactor {
  double at_zero = 1.0;
  double at_one = 0.0;

  double operator()(double alpha) const noexcept {
    return (1.0 - alpha) * at_zero + alpha * at_one;
  }
  // Action at which the factor takes `value` (unclamped).
  double inverse(double value) const noexcept {
    return (at_zero - value) / (at_zero - at_one);
  }
  bool operator==(const LinearFactor&) const = default;
};

// Law of the feedback x in [0,1]. Construction validates the support and the
// probability vector; the mean is computed once and cached.
class RewardDistribution {
 public:
  enum class Kind { PointMass, Bernoulli, Discrete };

  static RewardDistribution point_mass(double value);
  static RewardDistribution bernoulli(double p);
  static RewardDistribution discrete(std::vector<double> values, std::vector<double> probs);

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  // Point mass: {v}/{1}. Bernoulli: {0,1}/{1-p,p}. Discrete: as given.
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  // Bernoulli parameter or point-mass location.
  double parameter() const noexcept { return parameter_; }

  double sample(Rng& rng) const;

  bool operator==(const RewardDistribution&) const = default;

 private:
  RewardDistribution(Kind kind, double parameter, std::vector<double> values,
                     std::vector<double> probs);

  Kind kind_;
  double parameter_;
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double mean_;
};

const char* to_string(RewardDistribution::Kind kind) noexcept;

// A bandit-with-monotone-jumps instance: interval i is
// [breakpoints[i], breakpoints[i+1]) (the last one closed), feedback there is
// drawn from distributions[i], and the reward is linear_factor(alpha) * x.
// Plain value type; use make_instance() to get a validated one.
struct CanonicalInstance {
  std::string id;
  std::vector<double> breakpoints;
  std::vector<RewardDistribution> distributions;
  LinearFactor linear_factor;

  std::size_t size() const noexcept { return distributions.size(); }
  double mean(std::size_t i) const { return distributions.at(i).mean(); }
};

struct FeedbackSample {
  double action = 0.0;
  double observation = 0.0;
  double realized_reward = 0.0;
};

struct Optimum {
  double value = 0.0;
  double action = 0.0;
  std::size_t interval = 0;
};

class InvalidInstance : public std::invalid_argument {
 public:
  explicit InvalidInstance(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Every violated instance invariant, empty when the instance is valid.
std::vector<std::string> validate(const CanonicalInstance& instance);

// Throws InvalidInstance listing all violations.
CanonicalInstance make_instance(std::string id, std::vector<double> breakpoints,
                                std::vector<RewardDistribution> distributions,
                                LinearFactor linear_factor);

// Zero-based index of the interval containing alpha. Throws std::domain_error
// outside [0,1].
std::size_t interval_index(const CanonicalInstance& instance, double alpha);

// u(alpha) = l(alpha) * mu_{h(alpha)}.
double expected_utility(const CanonicalInstance& instance, double alpha);

// Maximum of u, attained at a left breakpoint; ties go to the smallest one.
Optimum optimum(const CanonicalInstance& instance);

FeedbackSample sample_feedback(const CanonicalInstance& instance, double alpha, Rng& rng);

// Smallest gap between consecutive interval means (+inf when n = 1).
double min_jump_gap(const CanonicalInstance& instance);

}  // namespace bwmj
