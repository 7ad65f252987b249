#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bsdlab/dominance.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/membership.hpp"
#include "bsdlab/piecewise.hpp"
#include "bsdlab/portfolio.hpp"
#include "bsdlab/utility.hpp"

namespace bsdlab {

inline nlohmann::json to_json(const PiecewisePolynomial& p) {
  nlohmann::json j;
  j["breakpoints"] = p.breakpoints;
  j["pieces"] = p.pieces;
  return j;
}

inline PiecewisePolynomial piecewise_from_json(const nlohmann::json& j) {
  PiecewisePolynomial p;
  p.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  p.pieces = j.at("pieces").get<std::vector<std::vector<double>>>();
  validate_piecewise(p);
  return p;
}

inline nlohmann::json to_json(const DominanceVerdict& v) {
  nlohmann::json j;
  j["order"] = order_name(v.order);
  j["exponent"] = v.exponent;
  j["degree"] = paper_degree(v.order, v.exponent);
  j["interval"] = {v.interval.a, v.interval.b};
  j["holds"] = v.holds;
  j["min_margin"] = v.min_margin;
  if (v.witness_c)
    j["witness_c"] = *v.witness_c;
  else
    j["witness_c"] = nullptr;
  if (v.threshold) j["c"] = *v.threshold;
  return j;
}

inline nlohmann::json to_json(const MembershipReport& r) {
  nlohmann::json j;
  j["class"] = class_name(r.class_id);
  j["n"] = r.n;
  j["member"] = r.member;
  j["worst_slack"] = r.worst_slack;
  j["worst_location"] = r.worst_location;
  j["tolerance"] = r.tolerance;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.per_condition)
    conds.push_back({{"condition", c.label}, {"slack", c.slack}, {"location", c.location}});
  j["per_condition"] = conds;
  j["flags"] = r.flags;
  return j;
}

inline nlohmann::json to_json(const PortfolioSolution& s) {
  nlohmann::json j;
  j["weights"] = s.weights;
  j["expected_return"] = s.expected_return;
  j["active_thresholds"] = s.active_thresholds;
  j["iterations"] = s.iterations;
  j["max_violation"] = s.max_violation;
  return j;
}

// Closed-form utility descriptors, e.g. {"kind":"power_crra_variant",
// "gamma":2.0, "b":1.0}.
inline UtilitySpec utility_from_json(const nlohmann::json& j, Interval iv) {
  if (!j.contains("kind") || !j.at("kind").is_string())
    raise(Errc::parse_error, "utility descriptor needs a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* field) -> double {
    if (!j.contains(field) || !j.at(field).is_number())
      raise(Errc::parse_error, std::string("descriptor '") + kind + "' needs number '" + field +
                                   "'");
    return j.at(field).get<double>();
  };
  auto integer = [&](const char* field) -> int {
    const double v = num(field);
    const int k = static_cast<int>(v);
    if (static_cast<double>(k) != v)
      raise(Errc::parse_error, std::string("field '") + field + "' must be an integer");
    return k;
  };

  if (kind == "power_crra_variant") return power_crra_variant(num("gamma"), num("b"), iv);
  if (kind == "neg_power") return neg_power(integer("n"), num("b"), iv);
  if (kind == "ap_only_witness") {
    const int n = integer("n");
    const double b = num("b");
    const double gamma =
        j.contains("gamma") ? j.at("gamma").get<double>() : (n + 1) / (2.0 * b * (n + 2));
    return ap_only_witness_utility(n, b, gamma, iv);
  }
  if (kind == "lpm_kink") return lpm_kink(integer("n"), num("c"), iv);
  if (kind == "affine") return affine_utility(num("alpha"), num("beta"), iv);
  if (kind == "constant") return constant_utility(num("kappa"), iv);
  raise(Errc::parse_error, "unknown utility kind '" + kind + "'");
}

}  // namespace bsdlab
