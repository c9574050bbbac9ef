#include "bwmj/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bwmj {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string describe_alpha(double alpha) {
  std::ostringstream os;
  os.precision(17);
  os << "action " << alpha << " outside [0,1]";
  return os.str();
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error(describe_alpha(alpha));
}

}  // namespace

RewardDistribution::RewardDistribution(Kind kind, double parameter, std::vector<double> values,
                                       std::vector<double> probs)
    : kind_(kind), parameter_(parameter), values_(std::move(values)), probs_(std::move(probs)) {
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  mean_ = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) mean_ += values_[i] * probs_[i];
  if (kind_ != Kind::Discrete) mean_ = parameter_;
}

RewardDistribution RewardDistribution::point_mass(double value) {
  if (!in_unit(value)) throw std::invalid_argument("point mass location must lie in [0,1]");
  return RewardDistribution(Kind::PointMass, value, {value}, {1.0});
}

RewardDistribution RewardDistribution::bernoulli(double p) {
  if (!in_unit(p)) throw std::invalid_argument("bernoulli parameter must lie in [0,1]");
  return RewardDistribution(Kind::Bernoulli, p, {0.0, 1.0}, {1.0 - p, p});
}

RewardDistribution RewardDistribution::discrete(std::vector<double> values,
                                                std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("discrete law needs matching nonempty values and probs");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!in_unit(values[i])) throw std::invalid_argument("discrete support must lie in [0,1]");
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
      throw std::invalid_argument("discrete probabilities must be nonnegative");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > kValidationTolerance)
    throw std::invalid_argument("discrete probabilities must sum to 1");
  return RewardDistribution(Kind::Discrete, 0.0, std::move(values), std::move(probs));
}

double RewardDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::PointMass:
      return parameter_;
    case Kind::Bernoulli:
      return uniform01(rng) < parameter_ ? 1.0 : 0.0;
    case Kind::Discrete: {
      const double u = uniform01(rng) * cdf_.back();
      auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      if (it == cdf_.end()) --it;
      return values_[static_cast<std::size_t>(it - cdf_.begin())];
    }
  }
  return 0.0;
}

const char* to_string(RewardDistribution::Kind kind) noexcept {
  switch (kind) {
    case RewardDistribution::Kind::PointMass:
      return "point_mass";
    case RewardDistribution::Kind::Bernoulli:
      return "bernoulli";
    case RewardDistribution::Kind::Discrete:
      return "discrete";
  }
  return "unknown";
}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid instance:";
  for (const auto& s : v) out += " " + s + ";";
  return out;
}

}  // namespace

InvalidInstance::InvalidInstance(std::vector<std::string> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<std::string> validate(const CanonicalInstance& instance) {
  std::vector<std::string> out;
  const auto& bp = instance.breakpoints;
  const std::size_t n = instance.distributions.size();

  if (n == 0) out.emplace_back("instance needs at least one interval");
  if (bp.size() != n + 1)
    out.emplace_back("breakpoint count must be number of distributions + 1");
  if (!bp.empty()) {
    if (bp.front() != 0.0) out.emplace_back("first breakpoint must be 0");
    if (bp.back() != 1.0) out.emplace_back("last breakpoint must be 1");
    for (double b : bp) {
      if (!std::isfinite(b)) {
        out.emplace_back("breakpoints must be finite");
        break;
      }
    }
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      if (!(bp[i] < bp[i + 1])) {
        out.emplace_back("breakpoints not strictly increasing");
        break;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(instance.distributions[i].mean() < instance.distributions[i + 1].mean())) {
      out.emplace_back("means not strictly increasing");
      break;
    }
  }
  const auto& lf = instance.linear_factor;
  if (!in_unit(lf.at_zero) || !in_unit(lf.at_one))
    out.emplace_back("linear factor values must lie in [0,1]");
  if (!(lf.at_zero > lf.at_one)) out.emplace_back("linear factor must be strictly decreasing");
  return out;
}

CanonicalInstance make_instance(std::string id, std::vector<double> breakpoints,
                                std::vector<RewardDistribution> distributions,
                                LinearFactor linear_factor) {
  CanonicalInstance inst{std::move(id), std::move(breakpoints), std::move(distributions),
                         linear_factor};
  if (auto v = validate(inst); !v.empty()) throw InvalidInstance(std::move(v));
  return inst;
}

std::size_t interval_index(const CanonicalInstance& instance, double alpha) {
  check_alpha(alpha);
  const auto& bp = instance.breakpoints;
  const std::size_t n = instance.size();
  // Interior breakpoints bp[1..n-1]; count those <= alpha.
  auto first = bp.begin() + 1;
  auto last = bp.begin() + static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(std::upper_bound(first, last, alpha) - first);
}

double expected_utility(const CanonicalInstance& instance, double alpha) {
  const std::size_t i = interval_index(instance, alpha);
  return instance.linear_factor(alpha) * instance.distributions[i].mean();
}

Optimum optimum(const CanonicalInstance& instance) {
  Optimum best{-std::numeric_limits<double>::infinity(), 0.0, 0};
  for (std::size_t i = 0; i < instance.size(); ++i) {
    const double a = instance.breakpoints[i];
    const double v = instance.linear_factor(a) * instance.distributions[i].mean();
    if (v > best.value) best = {v, a, i};
  }
  return best;
}

FeedbackSample sample_feedback(const CanonicalInstance& instance, double alpha, Rng& rng) {
  const std::size_t i = interval_index(instance, alpha);
  const double x = instance.distributions[i].sample(rng);
  return {alpha, x, instance.linear_factor(alpha) * x};
}

double min_jump_gap(const CanonicalInstance& instance) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < instance.size(); ++i)
    gap = std::min(gap, instance.mean(i + 1) - instance.mean(i));
  return gap;
}

}  // namespace bwmj
