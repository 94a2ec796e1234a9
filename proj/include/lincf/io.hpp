#pragma once

// JSON input (model, partition, plan, evidence, tabular models) and report
// emission. Structured reports print every float with 17 significant digits;
// tables round to 6.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lincf/disjunctive.hpp"
#include "lincf/sem.hpp"

namespace lincf {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& who) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ParseError, who, std::string("missing key '") + key + "'");
  return j.at(key);
}

inline double as_number(const Json& j, const std::string& who) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(ErrorCode::ParseError, who, "expected a number");
}

inline std::string as_string(const Json& j, const std::string& who) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  fail(ErrorCode::ParseError, who, "expected a string");
}

inline std::vector<std::string> as_strings(const Json& j, const std::string& who) {
  if (!j.is_array()) fail(ErrorCode::ParseError, who, "expected an array of names");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(as_string(e, who));
  return out;
}

inline Vector as_vector(const Json& j, const std::string& who) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) fail(ErrorCode::ParseError, who, "expected an array of numbers");
  Vector v(Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = as_number(j[i], who);
  return v;
}

/// Matrix of the expected shape; a flat list is accepted for one row and a
/// scalar for 1x1. Empty input gives a zero matrix when the shape is empty.
inline Matrix as_matrix(const Json& j, Index rows, Index cols, const std::string& who) {
  const std::string shape = std::to_string(rows) + "x" + std::to_string(cols);
  if (rows * cols == 0 && (j.is_null() || (j.is_array() && (j.empty() || (j.size() == std::size_t(rows) &&
                                                                          j[0].is_array() && j[0].empty()))))) {
    return Matrix::Zero(rows, cols);
  }
  if (j.is_number()) {
    if (rows != 1 || cols != 1) fail(ErrorCode::DimensionMismatch, who, "expected a " + shape + " matrix");
    return Matrix::Constant(1, 1, j.get<double>());
  }
  if (!j.is_array()) fail(ErrorCode::ParseError, who, "expected a matrix (array of rows)");
  if (rows == 1 && !j.empty() && !j[0].is_array()) {
    const Vector v = as_vector(j, who);
    if (v.size() != cols) fail(ErrorCode::DimensionMismatch, who, "expected a " + shape + " matrix");
    return v.transpose();
  }
  if (Index(j.size()) != rows) fail(ErrorCode::DimensionMismatch, who, "expected a " + shape + " matrix");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Vector v = as_vector(j[std::size_t(r)], who);
    if (v.size() != cols) fail(ErrorCode::DimensionMismatch, who, "expected a " + shape + " matrix");
    m.row(r) = v.transpose();
  }
  return m;
}

inline Matrix as_square(const Json& j, const std::string& who) {
  if (!j.is_array()) fail(ErrorCode::ParseError, who, "expected a square matrix");
  const Index n = Index(j.size());
  return as_matrix(j, n, n, who);
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidConfig, path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, path, e.what());
  }
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, "input", e.what());
  }
}

inline RawModel parse_raw_model(const Json& j) {
  using namespace detail;
  RawModel raw;
  raw.names = as_strings(member(j, "variables", "model"), "variables");
  if (j.contains("edges")) {
    const Json& edges = j.at("edges");
    if (!edges.is_array()) fail(ErrorCode::ParseError, "edges", "expected an array");
    for (const auto& e : edges) {
      RawEdge edge;
      if (e.is_array() && e.size() == 3) {
        edge = {as_string(e[0], "edges"), as_string(e[1], "edges"), as_number(e[2], "edges")};
      } else {
        edge.from = as_string(member(e, "from", "edges"), "edges.from");
        edge.to = as_string(member(e, "to", "edges"), "edges.to");
        edge.coeff = as_number(member(e, "coeff", "edges"), edge.from + "->" + edge.to);
      }
      raw.edges.push_back(edge);
    }
  }
  if (j.contains("intercepts")) {
    const Json& ic = j.at("intercepts");
    if (!ic.is_object()) fail(ErrorCode::ParseError, "intercepts", "expected an object name -> value");
    for (const auto& [k, v] : ic.items()) raw.intercepts[k] = as_number(v, "intercepts." + k);
  }
  const Json& d = member(j, "disturbances", "model");
  if (d.contains("cov")) {
    raw.dist_cov = as_square(d.at("cov"), "disturbances.cov");
  } else {
    const Json& var = member(d, "var", "disturbances");
    if (var.is_number()) {
      for (const auto& n : raw.names) raw.dist_var[n] = var.get<double>();
    } else if (var.is_object()) {
      for (const auto& [k, v] : var.items()) raw.dist_var[k] = as_number(v, "disturbances.var." + k);
    } else {
      fail(ErrorCode::ParseError, "disturbances.var", "expected a number or an object name -> variance");
    }
    if (d.contains("cov_pairs")) {
      for (const auto& p : d.at("cov_pairs")) {
        if (p.is_array() && p.size() == 3) {
          raw.cov_pairs.push_back({as_string(p[0], "cov_pairs"), as_string(p[1], "cov_pairs"),
                                   as_number(p[2], "cov_pairs")});
        } else {
          raw.cov_pairs.push_back({as_string(member(p, "a", "cov_pairs"), "cov_pairs"),
                                   as_string(member(p, "b", "cov_pairs"), "cov_pairs"),
                                   as_number(member(p, "value", "cov_pairs"), "cov_pairs")});
        }
      }
    }
  }
  return raw;
}

inline LinearSem parse_model(const Json& j) { return validate_model(parse_raw_model(j)); }

inline Partition parse_partition(const Json& j, const LinearSem& sem) {
  using namespace detail;
  const Json& p = member(j, "partition", "input");
  auto names = [&](const char* key) {
    return p.contains(key) ? as_strings(p.at(key), std::string("partition.") + key) : std::vector<std::string>{};
  };
  return make_partition(sem, names("treatments"), names("plan_f"), names("plan_w"),
                        as_string(member(p, "response", "partition"), "partition.response"));
}

/// Missing plan entries default to zero (an unconditional, perfect plan at x = 0).
inline ControlPlan parse_plan(const Json& j, const Partition& part) {
  using namespace detail;
  ControlPlan plan = ControlPlan::unconditional(part, Vector::Zero(part.n_x()));
  if (!j.contains("plan")) return plan;
  const Json& p = j.at("plan");
  if (p.contains("x")) {
    plan.x_const = as_vector(p.at("x"), "plan.x");
    if (plan.x_const.size() != part.n_x()) fail(ErrorCode::DimensionMismatch, "plan.x", "one value per treatment");
  }
  if (p.contains("a")) plan.gain_f = as_matrix(p.at("a"), part.n_x(), part.n_f(), "plan.a");
  if (p.contains("b")) plan.gain_w = as_matrix(p.at("b"), part.n_x(), part.n_w(), "plan.b");
  if (p.contains("noise_cov")) plan.noise_cov = as_matrix(p.at("noise_cov"), part.n_x(), part.n_x(), "plan.noise_cov");
  plan.validate(part);
  return plan;
}

/// {"point": {name: v}, "box": {name: [lo, hi]}} or {"moments": {"mean", "cov"}}.
inline Evidence parse_evidence(const Json& j, const LinearSem& sem) {
  using namespace detail;
  if (!j.contains("evidence") || j.at("evidence").is_null()) return Evidence::none();
  const Json& e = j.at("evidence");
  if (e.contains("moments")) {
    const Json& m = e.at("moments");
    Evidence ev = Evidence::user_moments(as_vector(member(m, "mean", "evidence.moments"), "evidence.moments.mean"),
                                         as_square(member(m, "cov", "evidence.moments"), "evidence.moments.cov"));
    return ev;
  }
  IndexList idx;
  std::vector<Interval> iv;
  if (e.contains("point")) {
    for (const auto& [k, v] : e.at("point").items()) {
      const double x = as_number(v, "evidence.point." + k);
      idx.push_back(sem.index_of(k));
      iv.push_back({x, x});
    }
  }
  if (e.contains("box")) {
    for (const auto& [k, v] : e.at("box").items()) {
      if (!v.is_array() || v.size() != 2) fail(ErrorCode::ParseError, "evidence.box." + k, "expected [lo, hi]");
      idx.push_back(sem.index_of(k));
      iv.push_back({as_number(v[0], "evidence.box." + k), as_number(v[1], "evidence.box." + k)});
    }
  }
  if (idx.empty()) return Evidence::none();
  Evidence ev = Evidence::box(std::move(idx), std::move(iv));
  ev.validate();
  return ev;
}

struct TabularQuery {
  TabularModel model;
  IndexList region;
  Index y = 0;
};

inline DiscreteVariable parse_discrete_variable(const Json& j, const std::string& who) {
  using namespace detail;
  DiscreteVariable v;
  v.name = as_string(member(j, "name", who), who + ".name");
  v.domain = as_strings(member(j, "domain", who), who + ".domain");
  return v;
}

/// Tabular model under key "discrete"; parent configurations are row-major
/// with the last parent varying fastest.
inline TabularQuery parse_tabular(const Json& j) {
  using namespace detail;
  const Json& d = member(j, "discrete", "input");
  TabularQuery q;
  TabularModel& m = q.model;
  m.treatment = parse_discrete_variable(member(d, "treatment", "discrete"), "discrete.treatment");
  m.outcome = parse_discrete_variable(member(d, "outcome", "discrete"), "discrete.outcome");
  if (d.contains("parents"))
    for (const auto& p : d.at("parents")) m.parents.push_back(parse_discrete_variable(p, "discrete.parents"));
  const Index nc = m.n_configs();
  const Vector pp = as_vector(member(d, "pr_parents", "discrete"), "discrete.pr_parents");
  m.pr_parents.assign(pp.data(), pp.data() + pp.size());
  m.pr_x_given_pa = as_matrix(member(d, "pr_x_given_pa", "discrete"), nc, m.treatment.size(), "discrete.pr_x_given_pa");
  const Json& ty = member(d, "pr_y_given_x_pa", "discrete");
  if (!ty.is_array() || Index(ty.size()) != nc) {
    fail(ErrorCode::InvalidTable, "discrete.pr_y_given_x_pa", "expected one table per parent configuration");
  }
  for (const auto& t : ty)
    m.pr_y_given_x_pa.push_back(as_matrix(t, m.treatment.size(), m.outcome.size(), "discrete.pr_y_given_x_pa"));
  m.validate();
  for (const auto& r : as_strings(member(d, "region", "discrete"), "discrete.region"))
    q.region.push_back(m.treatment.index_of(r));
  q.y = m.outcome.index_of(as_string(member(d, "y", "discrete"), "discrete.y"));
  return q;
}

// ---- serialization ----

inline Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline Json to_json(const Eigen::RowVectorXd& v) { return to_json(Vector(v.transpose())); }

inline Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vector(m.row(r).transpose())));
  return j;
}

inline Json names_json(const LinearSem& sem, const IndexList& idx) {
  Json j = Json::array();
  for (Index i : idx) j.push_back(sem.names[std::size_t(i)]);
  return j;
}

/// Inverse of parse_model: validate_model(parse_raw_model(model_to_json(m))) == m.
inline Json model_to_json(const LinearSem& sem) {
  Json j;
  j["variables"] = sem.names;
  Json edges = Json::array();
  for (Index i = 0; i < sem.size(); ++i)
    for (Index k = 0; k < sem.size(); ++k)
      if (sem.coeffs(i, k) != 0.0)
        edges.push_back({{"from", sem.names[std::size_t(k)]}, {"to", sem.names[std::size_t(i)]}, {"coeff", sem.coeffs(i, k)}});
  j["edges"] = edges;
  Json ic = Json::object();
  for (Index i = 0; i < sem.size(); ++i) ic[sem.names[std::size_t(i)]] = sem.intercepts(i);
  j["intercepts"] = ic;
  j["disturbances"] = {{"cov", to_json(sem.dist_cov)}};
  return j;
}

namespace detail {

inline std::string format_double(double v, int digits) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline bool is_flat(const Json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

inline void emit_json(const Json& j, std::ostream& out, int indent) {
  const std::string pad(std::size_t(indent) * 2, ' ');
  const std::string inner(std::size_t(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { out << "{}"; return; }
      out << "{\n";
      std::size_t k = 0;
      for (const auto& [key, v] : j.items()) {
        out << inner << Json(key).dump() << ": ";
        emit_json(v, out, indent + 1);
        out << (++k < j.size() ? ",\n" : "\n");
      }
      out << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { out << "[]"; return; }
      if (is_flat(j)) {
        out << "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out << ", ";
          emit_json(j[k], out, indent + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        out << inner;
        emit_json(j[k], out, indent + 1);
        out << (k + 1 < j.size() ? ",\n" : "\n");
      }
      out << pad << "]";
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>(), 17);
      return;
    default:
      out << j.dump();
  }
}

inline std::string table_cell(const Json& j) {
  if (j.is_number_float()) {
    std::string s = format_double(j.get<double>(), 6);
    if (s.front() == '"') s = s.substr(1, s.size() - 2);
    return s;
  }
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

inline void emit_table(const Json& j, std::ostream& out, const std::string& prefix) {
  if (j.is_object()) {
    for (const auto& [key, v] : j.items()) {
      const std::string name = prefix.empty() ? key : prefix + "." + key;
      emit_table(v, out, name);
    }
    return;
  }
  if (j.is_array() && !is_flat(j)) {
    bool matrix = true;
    for (const auto& row : j) matrix = matrix && row.is_array() && is_flat(row);
    if (matrix) {
      out << prefix << ":\n";
      for (const auto& row : j) {
        out << " ";
        for (const auto& c : row) {
          std::string s = table_cell(c);
          out << ' ' << std::string(s.size() < 13 ? 13 - s.size() : 0, ' ') << s;
        }
        out << '\n';
      }
      return;
    }
    for (std::size_t k = 0; k < j.size(); ++k) emit_table(j[k], out, prefix + "[" + std::to_string(k) + "]");
    return;
  }
  out << prefix << ": ";
  if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) out << (k ? "  " : "") << table_cell(j[k]);
  } else {
    out << table_cell(j);
  }
  out << '\n';
}

}  // namespace detail

/// Structured report: stable key order, 17 significant digits.
inline std::string dump_report(const Json& j) {
  std::ostringstream out;
  detail::emit_json(j, out, 0);
  out << '\n';
  return out.str();
}

/// Human-readable table: one "key: value" line per leaf, matrices as blocks.
inline std::string dump_table(const Json& j) {
  std::ostringstream out;
  detail::emit_table(j, out, "");
  return out.str();
}

}  // namespace lincf
