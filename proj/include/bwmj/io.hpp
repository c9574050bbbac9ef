#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bwmj/environments.hpp"
#include "bwmj/instance.hpp"

namespace bwmj::io {

using nlohmann::json;

// Raised for malformed documents; InvalidInstance is raised (unchanged) when
// the document parses but the instance violates its invariants.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json to_json(const RewardDistribution& d);
RewardDistribution distribution_from_json(const json& j);

json to_json(const CanonicalInstance& instance);
// Parses and validates.
CanonicalInstance instance_from_json(const json& j);

json to_json(const env::NativeMapping& m);
env::NativeMapping mapping_from_json(const json& j);

json to_json(const env::ContractProblem& p);
env::ContractProblem contract_from_json(const json& j);
json to_json(const env::BayesianContractProblem& p);
env::BayesianContractProblem bayesian_contract_from_json(const json& j);
json to_json(const env::PostedPriceProblem& p);
env::PostedPriceProblem posted_price_from_json(const json& j);
json to_json(const env::FirstPriceProblem& p);
env::FirstPriceProblem first_price_from_json(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

CanonicalInstance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const CanonicalInstance& instance);

}  // namespace bwmj::io
