#include "bwmj/io.hpp"

#include <fstream>

namespace bwmj::io {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const RewardDistribution& d) {
  switch (d.kind()) {
    case RewardDistribution::Kind::PointMass:
      return {{"kind", "point_mass"}, {"value", d.parameter()}};
    case RewardDistribution::Kind::Bernoulli:
      return {{"kind", "bernoulli"}, {"p", d.parameter()}};
    case RewardDistribution::Kind::Discrete:
      return {{"kind", "discrete"}, {"values", d.values()}, {"probs", d.probs()}};
  }
  return {};
}

RewardDistribution distribution_from_json(const json& j) {
  const auto kind = field<std::string>(j, "kind");
  try {
    if (kind == "point_mass") return RewardDistribution::point_mass(field<double>(j, "value"));
    if (kind == "bernoulli") return RewardDistribution::bernoulli(field<double>(j, "p"));
    if (kind == "discrete")
      return RewardDistribution::discrete(field<std::vector<double>>(j, "values"),
                                          field<std::vector<double>>(j, "probs"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("distribution: ") + e.what());
  }
  throw FormatError("unknown distribution kind '" + kind + "'");
}

json to_json(const CanonicalInstance& instance) {
  json dists = json::array();
  for (const auto& d : instance.distributions) dists.push_back(to_json(d));
  return {{"id", instance.id},
          {"breakpoints", instance.breakpoints},
          {"distributions", dists},
          {"linear_factor",
           {{"at_zero", instance.linear_factor.at_zero}, {"at_one", instance.linear_factor.at_one}}}};
}

CanonicalInstance instance_from_json(const json& j) {
  CanonicalInstance inst;
  inst.id = field<std::string>(j, "id");
  inst.breakpoints = field<std::vector<double>>(j, "breakpoints");
  const auto dists = field<json>(j, "distributions");
  if (!dists.is_array()) throw FormatError("'distributions' must be an array");
  for (const auto& d : dists) inst.distributions.push_back(distribution_from_json(d));
  const auto lf = field<json>(j, "linear_factor");
  inst.linear_factor = {field<double>(lf, "at_zero"), field<double>(lf, "at_one")};
  if (auto v = validate(inst); !v.empty()) throw InvalidInstance(std::move(v));
  return inst;
}

json to_json(const env::NativeMapping& m) {
  return {{"unit", m.unit}, {"offset", m.offset}, {"scale", m.scale}};
}

env::NativeMapping mapping_from_json(const json& j) {
  return {field<std::string>(j, "unit"), field<double>(j, "offset"), field<double>(j, "scale")};
}

json to_json(const env::ContractProblem& p) {
  return {{"rewards", p.rewards}, {"outcome_distributions", p.outcome_distributions}, {"costs", p.costs}};
}

env::ContractProblem contract_from_json(const json& j) {
  env::ContractProblem p;
  p.rewards = field<std::vector<double>>(j, "rewards");
  p.outcome_distributions = field<std::vector<std::vector<double>>>(j, "outcome_distributions");
  p.costs = field<std::vector<double>>(j, "costs");
  return p;
}

json to_json(const env::BayesianContractProblem& p) {
  json types = json::array();
  for (const auto& t : p.types) types.push_back(to_json(t));
  return {{"types", types}, {"type_distribution", p.type_distribution}};
}

env::BayesianContractProblem bayesian_contract_from_json(const json& j) {
  env::BayesianContractProblem p;
  const auto types = field<json>(j, "types");
  if (!types.is_array()) throw FormatError("'types' must be an array");
  for (const auto& t : types) p.types.push_back(contract_from_json(t));
  p.type_distribution = field<std::vector<double>>(j, "type_distribution");
  return p;
}

json to_json(const env::PostedPriceProblem& p) {
  return {{"valuations", p.valuations}, {"probabilities", p.probabilities}};
}

env::PostedPriceProblem posted_price_from_json(const json& j) {
  return {field<std::vector<double>>(j, "valuations"), field<std::vector<double>>(j, "probabilities")};
}

json to_json(const env::FirstPriceProblem& p) {
  return {{"valuation", p.valuation},
          {"competitor_bids", p.competitor_bids},
          {"probabilities", p.probabilities}};
}

env::FirstPriceProblem first_price_from_json(const json& j) {
  return {field<double>(j, "valuation"), field<std::vector<double>>(j, "competitor_bids"),
          field<std::vector<double>>(j, "probabilities")};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CanonicalInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json(path));
}

void save_instance(const std::filesystem::path& path, const CanonicalInstance& instance) {
  write_json(path, to_json(instance));
}

}  // namespace bwmj::io
