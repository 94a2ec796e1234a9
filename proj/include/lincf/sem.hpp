#pragma once

// Linear structural equation model V = mu + A V + eps, its path diagram, the
// (F, U, X, W, Z) partition, control plans and evidence descriptions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "lincf/error.hpp"
#include "lincf/linalg.hpp"

namespace lincf {

struct RawEdge {
  std::string from;
  std::string to;
  double coeff = 0.0;
};

struct RawCovPair {
  std::string a;
  std::string b;
  double value = 0.0;
};

/// Model description as read from a file, before any checking.
struct RawModel {
  std::vector<std::string> names;
  std::vector<RawEdge> edges;
  std::map<std::string, double> intercepts;
  // Either a full covariance matrix, or per-variable variances plus pairs.
  std::optional<Matrix> dist_cov;
  std::map<std::string, double> dist_var;
  std::vector<RawCovPair> cov_pairs;
};

/// Validated model. coeffs(i, j) is the path coefficient of V_j on V_i.
struct LinearSem {
  std::vector<std::string> names;
  Matrix coeffs;
  Vector intercepts;
  Vector dist_mean;  // zero for observational models; nonzero after abduction
  Matrix dist_cov;

  Index size() const { return static_cast<Index>(names.size()); }

  std::optional<Index> find(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<Index>(it - names.begin());
  }

  Index index_of(const std::string& name) const {
    if (auto i = find(name)) return *i;
    fail(ErrorCode::UnknownVariable, name, "variable '" + name + "' is not in the model");
  }

  std::size_t edge_count() const { return static_cast<std::size_t>((coeffs.array() != 0.0).count()); }
};

namespace detail {

inline void check_dist_cov(const std::vector<std::string>& names, const Matrix& cov) {
  const Index n = static_cast<Index>(names.size());
  if (cov.rows() != n || cov.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "disturbances.cov",
         "disturbance covariance must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(cov(i, i)) || cov(i, i) < 0.0) {
      fail(ErrorCode::NonPsdDistCov, names[i],
           "disturbance variance of '" + names[i] + "' is negative or not finite");
    }
  }
  const double scale = std::max(1.0, max_abs(cov));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > kSymmetryTol * scale) {
        fail(ErrorCode::AsymmetricDistCov, names[i] + "," + names[j],
             "disturbance covariance entries (" + names[i] + "," + names[j] + ") differ");
      }
    }
  }
  if (!is_psd(cov)) {
    fail(ErrorCode::NonPsdDistCov, "disturbances.cov",
         "disturbance covariance has a negative eigenvalue " + std::to_string(min_symmetric_eigenvalue(cov)));
  }
}

}  // namespace detail

/// Checks a raw description and builds the matrix form.
inline LinearSem validate_model(const RawModel& raw) {
  LinearSem sem;
  sem.names = raw.names;
  const Index n = static_cast<Index>(raw.names.size());
  std::unordered_map<std::string, Index> index;
  for (Index i = 0; i < n; ++i) {
    if (raw.names[i].empty()) fail(ErrorCode::ParseError, "variables", "empty variable name");
    if (!index.emplace(raw.names[i], i).second) {
      fail(ErrorCode::DuplicateName, raw.names[i], "variable '" + raw.names[i] + "' declared twice");
    }
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) fail(ErrorCode::UnknownVariable, name, "unknown variable '" + name + "'");
    return it->second;
  };

  sem.coeffs = Matrix::Zero(n, n);
  std::set<std::pair<Index, Index>> seen;
  for (const auto& e : raw.edges) {
    const Index from = lookup(e.from);
    const Index to = lookup(e.to);
    const std::string label = e.from + "->" + e.to;
    if (from == to) fail(ErrorCode::SelfLoop, label, "self-loop on '" + e.from + "'");
    if (!seen.emplace(to, from).second) fail(ErrorCode::DuplicateEdge, label, "edge " + label + " listed twice");
    if (e.coeff == 0.0) {
      fail(ErrorCode::ZeroCoefficientEdge, label, "edge " + label + " has coefficient 0; omit absent edges");
    }
    if (!std::isfinite(e.coeff)) fail(ErrorCode::ParseError, label, "edge " + label + " coefficient not finite");
    sem.coeffs(to, from) = e.coeff;
  }

  sem.intercepts = Vector::Zero(n);
  for (const auto& [name, value] : raw.intercepts) sem.intercepts(lookup(name)) = value;
  sem.dist_mean = Vector::Zero(n);

  if (raw.dist_cov) {
    sem.dist_cov = *raw.dist_cov;
  } else {
    sem.dist_cov = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      auto it = raw.dist_var.find(raw.names[i]);
      if (it == raw.dist_var.end()) {
        fail(ErrorCode::InvalidConfig, raw.names[i], "no disturbance variance given for '" + raw.names[i] + "'");
      }
      sem.dist_cov(i, i) = it->second;
    }
    for (const auto& [name, value] : raw.dist_var) lookup(name);
    for (const auto& p : raw.cov_pairs) {
      const Index a = lookup(p.a);
      const Index b = lookup(p.b);
      if (a == b) {
        fail(ErrorCode::InvalidConfig, p.a, "cov_pairs entry pairs '" + p.a + "' with itself; use var");
      }
      sem.dist_cov(a, b) = p.value;
      sem.dist_cov(b, a) = p.value;
    }
  }
  detail::check_dist_cov(sem.names, sem.dist_cov);
  return sem;
}

/// All vertices reachable from `seed` along directed paths of nonzero
/// coefficients. Seed members appear only if reachable through a cycle.
inline IndexList descendants(const LinearSem& sem, std::span<const Index> seed) {
  const Index n = sem.size();
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::queue<Index> frontier;
  for (Index s : seed) frontier.push(s);
  while (!frontier.empty()) {
    const Index j = frontier.front();
    frontier.pop();
    for (Index i = 0; i < n; ++i) {
      if (sem.coeffs(i, j) != 0.0 && !visited[static_cast<std::size_t>(i)]) {
        visited[static_cast<std::size_t>(i)] = 1;
        frontier.push(i);
      }
    }
  }
  IndexList out;
  for (Index i = 0; i < n; ++i)
    if (visited[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

/// Index sets of the partition, in model indices. F, X and W keep the order
/// the user gave them (it fixes the column layout of the gains); U and Z are
/// in model order.
struct Partition {
  IndexList f, u, x, w, z;
  Index y = -1;

  IndexList s() const { return concat({f, u}); }
  IndexList t() const { return concat({w, z}); }
  /// Canonical (S, X, T) = (F, U, X, W, Z) layout.
  IndexList canonical() const { return concat({f, u, x, w, z}); }

  Index n_f() const { return Index(f.size()); }
  Index n_u() const { return Index(u.size()); }
  Index n_s() const { return n_f() + n_u(); }
  Index n_x() const { return Index(x.size()); }
  Index n_w() const { return Index(w.size()); }
  Index n_z() const { return Index(z.size()); }
  Index n_t() const { return n_w() + n_z(); }

  /// Position of Y inside the S block.
  Index y_in_s() const {
    const auto ss = s();
    return static_cast<Index>(std::find(ss.begin(), ss.end(), y) - ss.begin());
  }
  bool y_in_f() const { return std::find(f.begin(), f.end(), y) != f.end(); }

  /// Permutation matrix P with (P v) = v in canonical order.
  Matrix permutation(Index n_v) const {
    const auto order = canonical();
    Matrix p = Matrix::Zero(n_v, n_v);
    for (std::size_t r = 0; r < order.size(); ++r) p(Index(r), order[r]) = 1.0;
    return p;
  }
};

inline Partition make_partition(const LinearSem& sem, const std::vector<std::string>& x_names,
                                const std::vector<std::string>& f_names,
                                const std::vector<std::string>& w_names, const std::string& y_name) {
  if (x_names.empty()) fail(ErrorCode::EmptyTreatments, "treatments", "at least one treatment is required");
  Partition part;
  std::set<Index> used;
  auto claim = [&](const std::string& name) {
    const Index i = sem.index_of(name);
    if (!used.insert(i).second) {
      fail(ErrorCode::OverlappingSets, name, "'" + name + "' appears in more than one role");
    }
    return i;
  };
  for (const auto& name : x_names) part.x.push_back(claim(name));

  std::set<Index> desc;
  for (Index i : descendants(sem, part.x)) desc.insert(i);
  for (Index i : part.x) desc.erase(i);

  for (const auto& name : f_names) {
    const Index i = claim(name);
    if (!desc.contains(i)) {
      fail(ErrorCode::FNotDescendant, name, "plan input '" + name + "' is not a descendant of the treatments");
    }
    part.f.push_back(i);
  }
  for (const auto& name : w_names) {
    const Index i = claim(name);
    if (desc.contains(i)) {
      fail(ErrorCode::WIsDescendant, name, "covariate '" + name + "' is a descendant of the treatments");
    }
    part.w.push_back(i);
  }
  part.y = sem.index_of(y_name);
  if (!desc.contains(part.y)) {
    fail(ErrorCode::YNotInS, y_name, "response '" + y_name + "' is not affected by the treatments");
  }
  for (Index i = 0; i < sem.size(); ++i) {
    if (used.contains(i)) continue;
    (desc.contains(i) ? part.u : part.z).push_back(i);
  }
  return part;
}

/// X = x + a F + b W + eps*, cov(eps*) = noise_cov.
struct ControlPlan {
  Vector x_const;
  Matrix gain_f;     // n_x x n_f  (a)
  Matrix gain_w;     // n_x x n_w  (b)
  Matrix noise_cov;  // n_x x n_x

  static ControlPlan unconditional(const Partition& part, const Vector& x) {
    return {x, Matrix::Zero(part.n_x(), part.n_f()), Matrix::Zero(part.n_x(), part.n_w()),
            Matrix::Zero(part.n_x(), part.n_x())};
  }

  bool is_unconditional() const { return max_abs(gain_f) == 0.0 && max_abs(gain_w) == 0.0; }
  bool is_perfect() const { return max_abs(noise_cov) == 0.0; }

  void validate(const Partition& part) const {
    auto dims = [](const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); };
    if (x_const.size() != part.n_x()) {
      fail(ErrorCode::DimensionMismatch, "plan.x", "plan constant has length " + std::to_string(x_const.size()) +
                                                       ", expected " + std::to_string(part.n_x()));
    }
    if (gain_f.rows() != part.n_x() || gain_f.cols() != part.n_f()) {
      fail(ErrorCode::DimensionMismatch, "plan.a", "gain a is " + dims(gain_f) + ", expected " +
                                                       std::to_string(part.n_x()) + "x" + std::to_string(part.n_f()));
    }
    if (gain_w.rows() != part.n_x() || gain_w.cols() != part.n_w()) {
      fail(ErrorCode::DimensionMismatch, "plan.b", "gain b is " + dims(gain_w) + ", expected " +
                                                       std::to_string(part.n_x()) + "x" + std::to_string(part.n_w()));
    }
    if (noise_cov.rows() != part.n_x() || noise_cov.cols() != part.n_x()) {
      fail(ErrorCode::DimensionMismatch, "plan.noise_cov", "plan noise covariance is " + dims(noise_cov));
    }
    if (!is_symmetric(noise_cov)) fail(ErrorCode::AsymmetricDistCov, "plan.noise_cov", "plan noise not symmetric");
    if (!is_psd(noise_cov)) fail(ErrorCode::NonPsdDistCov, "plan.noise_cov", "plan noise not PSD");
  }

  /// C_xs = (a, 0): n_x x n_s, columns in (F, U) order.
  Matrix c_xs(const Partition& part) const {
    Matrix c = Matrix::Zero(part.n_x(), part.n_s());
    c.leftCols(part.n_f()) = gain_f;
    return c;
  }
  /// C_xt = (b, 0): n_x x n_t, columns in (W, Z) order.
  Matrix c_xt(const Partition& part) const {
    Matrix c = Matrix::Zero(part.n_x(), part.n_t());
    c.leftCols(part.n_w()) = gain_w;
    return c;
  }
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool degenerate() const { return lo == hi; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Evidence H in R_h. Point evidence is a box whose intervals are degenerate.
struct Evidence {
  enum class Kind { None, Region, UserMoments };

  Kind kind = Kind::None;
  IndexList indices;
  std::vector<Interval> intervals;
  Vector user_mean;
  Matrix user_cov;

  static Evidence none() { return {}; }

  static Evidence point(IndexList idx, const std::vector<double>& values) {
    std::vector<Interval> iv;
    for (double v : values) iv.push_back({v, v});
    return box(std::move(idx), std::move(iv));
  }

  static Evidence box(IndexList idx, std::vector<Interval> iv) {
    Evidence ev;
    ev.kind = idx.empty() ? Kind::None : Kind::Region;
    ev.indices = std::move(idx);
    ev.intervals = std::move(iv);
    ev.validate();
    return ev;
  }

  static Evidence user_moments(Vector mean, Matrix cov) {
    Evidence ev;
    ev.kind = Kind::UserMoments;
    ev.user_mean = std::move(mean);
    ev.user_cov = std::move(cov);
    return ev;
  }

  bool all_degenerate() const {
    return std::all_of(intervals.begin(), intervals.end(), [](const Interval& i) { return i.degenerate(); });
  }

  IndexList point_indices() const { return filter(true); }
  IndexList box_indices() const { return filter(false); }

  Vector point_values() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (intervals[k].degenerate()) out.push_back(intervals[k].lo);
    return Eigen::Map<Vector>(out.data(), Index(out.size()));
  }

  void validate() const {
    if (indices.size() != intervals.size()) {
      fail(ErrorCode::DimensionMismatch, "evidence", "indices and intervals differ in length");
    }
    std::set<Index> seen;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const auto& iv = intervals[k];
      const std::string who = "evidence[" + std::to_string(indices[k]) + "]";
      if (!seen.insert(indices[k]).second) fail(ErrorCode::OverlappingSets, who, "variable constrained twice");
      if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
        fail(ErrorCode::InvalidInterval, who, "interval needs lower <= upper");
      }
      if (std::isinf(iv.lo) && std::isinf(iv.hi)) {
        fail(ErrorCode::InvalidInterval, who, "interval needs at least one finite bound");
      }
    }
  }

 private:
  IndexList filter(bool degenerate) const {
    IndexList out;
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (intervals[k].degenerate() == degenerate) out.push_back(indices[k]);
    return out;
  }
};

}  // namespace lincf
