#pragma once

#include <string>
#include <vector>

#include "bwmj/environments.hpp"
#include "bwmj/instance.hpp"

namespace testing {

inline bwmj::CanonicalInstance point_mass_instance(std::vector<double> breakpoints, const std::vector<double>& means,
                                                   std::string id = "pm") {
  std::vector<bwmj::RewardDistribution> laws;
  for (double m : means) laws.push_back(bwmj::RewardDistribution::point_mass(m));
  return bwmj::make_instance(std::move(id), std::move(breakpoints), std::move(laws), {1.0, 0.0});
}

inline bwmj::CanonicalInstance bernoulli_instance(std::vector<double> breakpoints, const std::vector<double>& means,
                                                  std::string id = "bern") {
  std::vector<bwmj::RewardDistribution> laws;
  for (double m : means) laws.push_back(bwmj::RewardDistribution::bernoulli(m));
  return bwmj::make_instance(std::move(id), std::move(breakpoints), std::move(laws), {1.0, 0.0});
}

// Three-interval example used throughout: breakpoints [0,0.3,0.7,1], means (0.2,0.5,0.9).
inline bwmj::CanonicalInstance core_example() {
  return point_mass_instance({0.0, 0.3, 0.7, 1.0}, {0.2, 0.5, 0.9}, "core-example");
}

inline bwmj::CanonicalInstance random_point_mass(std::size_t n, bwmj::Rng& rng, std::string id = "random-pm") {
  bwmj::env::RandomInstanceParams params;
  params.kind = bwmj::RewardDistribution::Kind::PointMass;
  return bwmj::env::random_instance(n, rng, params, std::move(id));
}

}  // namespace testing
