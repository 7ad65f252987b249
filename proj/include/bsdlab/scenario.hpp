#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/interval.hpp"

namespace bsdlab {

// Joint scenario table of asset returns: returns[i][s] is asset i's return in
// scenario s; scenario_probs sums to one.
class ScenarioTable {
 public:
  ScenarioTable(std::vector<std::vector<double>> returns, std::vector<double> scenario_probs,
                std::vector<std::string> asset_names = {}, bool normalize = false)
      : returns_(std::move(returns)),
        probs_(std::move(scenario_probs)),
        asset_names_(std::move(asset_names)) {
    if (returns_.empty() || probs_.empty())
      raise(Errc::bad_weights, "scenario table needs at least one asset and one scenario");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0) || !std::isfinite(p))
        raise(Errc::bad_weights, "scenario probabilities must be positive");
      sum += p;
    }
    if (!normalize && std::fabs(sum - 1.0) > 1e-9)
      raise(Errc::bad_weights, "scenario probabilities must sum to one");
    for (double& p : probs_) p /= sum;
    for (const auto& row : returns_) {
      if (row.size() != probs_.size())
        raise(Errc::bad_weights, "every asset needs one return per scenario");
      for (double r : row)
        if (!std::isfinite(r)) raise(Errc::bad_weights, "returns must be finite");
    }
    if (!asset_names_.empty() && asset_names_.size() != returns_.size())
      raise(Errc::bad_weights, "asset name count does not match asset count");
    if (asset_names_.empty())
      for (std::size_t i = 0; i < returns_.size(); ++i)
        asset_names_.push_back("asset" + std::to_string(i + 1));
  }

  std::size_t assets() const { return returns_.size(); }
  std::size_t scenarios() const { return probs_.size(); }
  const std::vector<std::vector<double>>& returns() const { return returns_; }
  const std::vector<double>& scenario_probs() const { return probs_; }
  const std::vector<std::string>& asset_names() const { return asset_names_; }

  double expected_return(std::size_t asset) const {
    double m = 0.0;
    for (std::size_t s = 0; s < probs_.size(); ++s) m += probs_[s] * returns_[asset][s];
    return m;
  }

  // Scenario-wise portfolio return for a given weight vector.
  double portfolio_return(const std::vector<double>& weights, std::size_t scenario) const {
    double r = 0.0;
    for (std::size_t i = 0; i < returns_.size(); ++i) r += weights[i] * returns_[i][scenario];
    return r;
  }

 private:
  std::vector<std::vector<double>> returns_;
  std::vector<double> probs_;
  std::vector<std::string> asset_names_;
};

inline void validate_simplex(const std::vector<double>& weights, double tol = 1e-9) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < -tol) raise(Errc::bad_weights, "weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > tol) raise(Errc::bad_weights, "weights must sum to one");
}

// Distribution of the weighted portfolio return across scenarios. Atom
// collisions merge; any return outside [a,b] is an error.
inline DiscreteDistribution portfolio_distribution(const ScenarioTable& table,
                                                   const std::vector<double>& weights,
                                                   Interval interval) {
  if (weights.size() != table.assets())
    raise(Errc::bad_weights, "weight count does not match asset count");
  validate_simplex(weights);
  std::vector<double> atoms(table.scenarios());
  for (std::size_t s = 0; s < table.scenarios(); ++s) {
    atoms[s] = table.portfolio_return(weights, s);
    if (!interval.contains(atoms[s]))
      raise(Errc::out_of_interval,
            "portfolio return " + std::to_string(atoms[s]) + " outside [a,b]");
  }
  return make_distribution(std::move(atoms), table.scenario_probs(), interval);
}

}  // namespace bsdlab
