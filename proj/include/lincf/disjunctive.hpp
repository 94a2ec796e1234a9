#pragma once

// Disjunctive plans (X in R_x) on a finite-state model with a single
// treatment: units observe pa(X) and pick x in R_x with the natural policy
// renormalised over the region.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "lincf/error.hpp"
#include "lincf/linalg.hpp"

namespace lincf {

inline constexpr double kZeroMass = 1e-15;
inline constexpr double kNormalizationTol = 1e-12;

struct DiscreteVariable {
  std::string name;
  std::vector<std::string> domain;

  Index size() const { return Index(domain.size()); }
  Index index_of(const std::string& value) const {
    auto it = std::find(domain.begin(), domain.end(), value);
    if (it == domain.end()) fail(ErrorCode::UnknownVariable, name + "=" + value, "value not in domain of " + name);
    return Index(it - domain.begin());
  }
};

/// pr(pa), pr(x | pa), pr(y | x, pa) with parent configurations enumerated
/// row-major over `parents` (last parent varies fastest).
struct TabularModel {
  DiscreteVariable treatment;
  DiscreteVariable outcome;
  std::vector<DiscreteVariable> parents;
  std::vector<double> pr_parents;        // [config]
  Matrix pr_x_given_pa;                  // config x treatment value
  std::vector<Matrix> pr_y_given_x_pa;   // [config](treatment value, outcome value)

  Index n_configs() const {
    Index n = 1;
    for (const auto& p : parents) n *= p.size();
    return n;
  }

  /// Parent values of configuration `c`.
  std::vector<std::string> config_values(Index c) const {
    std::vector<std::string> out(parents.size());
    for (std::size_t k = parents.size(); k-- > 0;) {
      out[k] = parents[k].domain[std::size_t(c % parents[k].size())];
      c /= parents[k].size();
    }
    return out;
  }

  void validate() const {
    const Index nc = n_configs();
    const Index nx = treatment.size();
    const Index ny = outcome.size();
    if (nx == 0 || ny == 0) fail(ErrorCode::InvalidTable, "domains", "treatment and outcome need nonempty domains");
    auto check_dist = [](auto begin, auto end, const std::string& who) {
      double sum = 0.0;
      for (auto it = begin; it != end; ++it) {
        if (!(*it >= 0.0) || !std::isfinite(*it)) fail(ErrorCode::InvalidTable, who, "probabilities must be >= 0");
        sum += *it;
      }
      if (std::abs(sum - 1.0) > kNormalizationTol) {
        fail(ErrorCode::InvalidTable, who, "distribution sums to " + std::to_string(sum) + ", not 1");
      }
    };
    if (Index(pr_parents.size()) != nc) fail(ErrorCode::InvalidTable, "pr_parents", "wrong number of entries");
    check_dist(pr_parents.begin(), pr_parents.end(), "pr_parents");
    if (pr_x_given_pa.rows() != nc || pr_x_given_pa.cols() != nx) {
      fail(ErrorCode::InvalidTable, "pr_x_given_pa", "table must be n_configs x |dom(X)|");
    }
    if (Index(pr_y_given_x_pa.size()) != nc) fail(ErrorCode::InvalidTable, "pr_y_given_x_pa", "one table per config");
    for (Index c = 0; c < nc; ++c) {
      const Eigen::RowVectorXd row = pr_x_given_pa.row(c);
      check_dist(row.data(), row.data() + row.size(), "pr_x_given_pa[" + std::to_string(c) + "]");
      const Matrix& t = pr_y_given_x_pa[std::size_t(c)];
      if (t.rows() != nx || t.cols() != ny) {
        fail(ErrorCode::InvalidTable, "pr_y_given_x_pa", "table must be |dom(X)| x |dom(Y)| per config");
      }
      for (Index x = 0; x < nx; ++x) {
        const Eigen::RowVectorXd yr = t.row(x);
        check_dist(yr.data(), yr.data() + yr.size(),
                   "pr_y_given_x_pa[" + std::to_string(c) + "][" + std::to_string(x) + "]");
      }
    }
  }
};

namespace detail {

inline void check_region(const TabularModel& m, const IndexList& region) {
  if (region.empty()) fail(ErrorCode::InvalidConfig, "region", "region must contain at least one treatment value");
  std::set<Index> seen;
  for (Index x : region) {
    if (x < 0 || x >= m.treatment.size()) fail(ErrorCode::InvalidConfig, "region", "treatment value out of range");
    if (!seen.insert(x).second) fail(ErrorCode::InvalidConfig, "region", "treatment value repeated in region");
  }
}

inline double region_mass(const TabularModel& m, const IndexList& region, Index c) {
  double mass = 0.0;
  for (Index x : region) mass += m.pr_x_given_pa(c, x);
  return mass;
}

}  // namespace detail

/// pr(x | pa, x in R_x): rows are parent configurations, zero outside R_x.
inline Matrix stochastic_policy(const TabularModel& m, const IndexList& region) {
  detail::check_region(m, region);
  Matrix policy = Matrix::Zero(m.n_configs(), m.treatment.size());
  for (Index c = 0; c < m.n_configs(); ++c) {
    const double mass = detail::region_mass(m, region, c);
    if (mass < kZeroMass) {
      fail(ErrorCode::ZeroMassRegion, "config " + std::to_string(c),
           "region has zero probability under parent configuration " + std::to_string(c));
    }
    for (Index x : region) policy(c, x) = m.pr_x_given_pa(c, x) / mass;
  }
  return policy;
}

/// pr(y \\ (X in R_x)) = sum_{x in R_x, pa} pr(y | x, pa) pr(x | pa, x in R_x) pr(pa).
inline double disjunctive_effect(const TabularModel& m, const IndexList& region, Index y) {
  const Matrix policy = stochastic_policy(m, region);
  double total = 0.0;
  for (Index c = 0; c < m.n_configs(); ++c)
    for (Index x : region) total += m.pr_y_given_x_pa[std::size_t(c)](x, y) * policy(c, x) * m.pr_parents[std::size_t(c)];
  return total;
}

/// Observational pr(y | x in R_x, pa = config).
inline double pr_y_given_region_and_parents(const TabularModel& m, const IndexList& region, Index y, Index config) {
  detail::check_region(m, region);
  const double mass = detail::region_mass(m, region, config);
  if (mass < kZeroMass) fail(ErrorCode::ZeroMassRegion, "config " + std::to_string(config), "region has zero mass");
  double num = 0.0;
  for (Index x : region) num += m.pr_y_given_x_pa[std::size_t(config)](x, y) * m.pr_x_given_pa(config, x);
  return num / mass;
}

/// Observational pr(y | x in R_x), parents marginalised.
inline double pr_y_given_region(const TabularModel& m, const IndexList& region, Index y) {
  detail::check_region(m, region);
  double num = 0.0;
  double den = 0.0;
  for (Index c = 0; c < m.n_configs(); ++c) {
    for (Index x : region) {
      const double joint = m.pr_parents[std::size_t(c)] * m.pr_x_given_pa(c, x);
      num += joint * m.pr_y_given_x_pa[std::size_t(c)](x, y);
      den += joint;
    }
  }
  if (den < kZeroMass) fail(ErrorCode::ZeroMassRegion, "region", "region has zero marginal probability");
  return num / den;
}

}  // namespace lincf
