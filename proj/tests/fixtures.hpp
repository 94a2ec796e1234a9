#pragma once

// Fixture fleet shared by the unit and acceptance suites. Each entry carries
// a model, a partition, a conditional plan (x, a, b), plan noise and one
// point and one box evidence set.

#include <map>
#include <string>
#include <vector>

#include "lincf/lincf.hpp"

namespace fixtures {

using lincf::Index;
using lincf::Matrix;
using lincf::Vector;

struct Fixture {
  std::string name;
  lincf::LinearSem sem;
  lincf::Partition part;
  Vector x;
  Matrix a;
  Matrix b;
  Matrix noise;
  std::map<std::string, double> point;
  std::map<std::string, lincf::Interval> box;
  bool acyclic = true;

  lincf::ControlPlan unconditional(bool imperfect) const {
    auto p = lincf::ControlPlan::unconditional(part, x);
    if (imperfect) p.noise_cov = noise;
    return p;
  }
  lincf::ControlPlan conditional(bool imperfect) const {
    auto p = unconditional(imperfect);
    p.gain_f = a;
    p.gain_w = b;
    return p;
  }
  lincf::Evidence point_evidence() const {
    lincf::IndexList idx;
    std::vector<double> v;
    for (const auto& [k, val] : point) {
      idx.push_back(sem.index_of(k));
      v.push_back(val);
    }
    return lincf::Evidence::point(idx, v);
  }
  lincf::Evidence box_evidence() const {
    lincf::IndexList idx;
    std::vector<lincf::Interval> iv;
    for (const auto& [k, val] : box) {
      idx.push_back(sem.index_of(k));
      iv.push_back(val);
    }
    return lincf::Evidence::box(idx, iv);
  }
};

struct Spec {
  std::string name;
  std::vector<std::string> vars;
  std::vector<lincf::RawEdge> edges;
  std::map<std::string, double> intercepts;
  std::vector<lincf::RawCovPair> cov_pairs;
  std::map<std::string, double> var;  // default 1
  std::vector<std::string> x, f, w;
  std::string y;
  std::vector<double> x_val;
  Matrix a, b, noise;
  std::map<std::string, double> point;
  std::map<std::string, lincf::Interval> box;
  bool acyclic = true;
};

inline Matrix mat(Index r, Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

inline lincf::LinearSem build_sem(const std::vector<std::string>& vars, const std::vector<lincf::RawEdge>& edges,
                                  const std::map<std::string, double>& intercepts = {},
                                  const std::vector<lincf::RawCovPair>& cov_pairs = {},
                                  const std::map<std::string, double>& var = {}) {
  lincf::RawModel raw;
  raw.names = vars;
  raw.edges = edges;
  raw.intercepts = intercepts;
  for (const auto& v : vars) raw.dist_var[v] = var.count(v) ? var.at(v) : 1.0;
  raw.cov_pairs = cov_pairs;
  return lincf::validate_model(raw);
}

inline Fixture build(const Spec& s) {
  Fixture fx;
  fx.name = s.name;
  fx.sem = build_sem(s.vars, s.edges, s.intercepts, s.cov_pairs, s.var);
  fx.part = lincf::make_partition(fx.sem, s.x, s.f, s.w, s.y);
  fx.x = Eigen::Map<const Vector>(s.x_val.data(), Index(s.x_val.size()));
  fx.a = s.a.size() ? s.a : Matrix::Zero(fx.part.n_x(), fx.part.n_f());
  fx.b = s.b.size() ? s.b : Matrix::Zero(fx.part.n_x(), fx.part.n_w());
  fx.noise = s.noise;
  fx.point = s.point;
  fx.box = s.box;
  fx.acyclic = s.acyclic;
  return fx;
}

constexpr double inf = std::numeric_limits<double>::infinity();

inline std::vector<Fixture> fleet() {
  std::vector<Spec> specs;
  // W -> X -> Y with a back-door W -> Y
  specs.push_back({"chain", {"W", "X", "Y"},
                   {{"W", "X", 0.5}, {"X", "Y", 2.0}, {"W", "Y", 1.0}}, {}, {}, {},
                   {"X"}, {}, {"W"}, "Y", {1.0}, Matrix(1, 0), mat(1, 1, {-0.3}), mat(1, 1, {0.25}),
                   {{"W", 1.0}}, {{"W", {0.0, inf}}}});
  specs.push_back({"mediator", {"W", "X", "M", "Y"},
                   {{"W", "X", 0.5}, {"X", "M", 0.8}, {"M", "Y", 1.2}, {"X", "Y", 0.3}, {"W", "Y", 0.4},
                    {"W", "M", 0.2}},
                   {}, {}, {}, {"X"}, {"M"}, {"W"}, "Y", {0.5}, mat(1, 1, {0.3}), mat(1, 1, {0.2}),
                   mat(1, 1, {0.5}), {{"Y", 1.0}}, {{"M", {-0.5, 1.5}}}});
  specs.push_back({"confounded", {"Z", "X", "Y"},
                   {{"Z", "X", 0.7}, {"X", "Y", 1.5}}, {}, {{"X", "Y", 0.4}}, {},
                   {"X"}, {"Y"}, {"Z"}, "Y", {-1.0}, mat(1, 1, {0.2}), mat(1, 1, {0.1}), mat(1, 1, {0.3}),
                   {{"Z", 0.5}}, {{"Y", {0.0, inf}}}});
  Spec cyc{"cycle_in_s", {"W", "X", "A", "B", "Y"},
           {{"W", "X", 0.6}, {"X", "A", 1.0}, {"A", "B", 0.5}, {"B", "A", 0.4}, {"B", "Y", 1.0}, {"W", "Y", 0.5}},
           {}, {}, {}, {"X"}, {"A"}, {"W"}, "Y", {2.0}, mat(1, 1, {0.2}), mat(1, 1, {-0.4}), mat(1, 1, {0.2}),
           {{"W", -1.0}}, {{"A", {-1.0, 1.0}}}};
  cyc.acyclic = false;
  specs.push_back(cyc);
  Spec fb{"feedback_xy", {"C", "X", "Y"},
          {{"C", "X", 0.5}, {"X", "Y", 0.5}, {"Y", "X", 0.4}}, {}, {}, {},
          {"X"}, {"Y"}, {"C"}, "Y", {1.0}, mat(1, 1, {0.4}), mat(1, 1, {0.3}), mat(1, 1, {0.4}),
          {{"Y", 1.0}}, {{"C", {0.5, inf}}}};
  fb.acyclic = false;
  specs.push_back(fb);
  specs.push_back({"two_treatments", {"W", "X1", "X2", "M", "Y"},
                   {{"W", "X1", 0.5}, {"W", "X2", -0.4}, {"X1", "M", 1.0}, {"X2", "M", 0.5}, {"M", "Y", 0.7},
                    {"X1", "Y", 0.2}, {"X2", "Y", 1.0}, {"W", "Y", 0.3}},
                   {}, {}, {}, {"X1", "X2"}, {"M"}, {"W"}, "Y", {1.0, -0.5}, mat(2, 1, {0.2, 0.1}),
                   mat(2, 1, {0.1, -0.2}), mat(2, 2, {0.2, 0.05, 0.05, 0.1}), {{"W", 0.5}},
                   {{"Y", {-1.0, 2.0}}}});
  specs.push_back({"two_w_correlated", {"W1", "W2", "X", "Y"},
                   {{"W1", "X", 0.4}, {"W2", "X", 0.3}, {"X", "Y", 1.0}, {"W1", "Y", 0.5}, {"W2", "Y", -0.6}},
                   {}, {{"W1", "W2", 0.5}}, {}, {"X"}, {}, {"W1", "W2"}, "Y", {0.0}, Matrix(1, 0),
                   mat(1, 2, {0.1, -0.2}), mat(1, 1, {0.3}), {{"W1", 1.0}, {"W2", 0.0}},
                   {{"W1", {-0.5, inf}}, {"W2", {-inf, 1.0}}}});
  specs.push_back({"long_chain", {"Z1", "W", "X", "M1", "M2", "Y", "Z2"},
                   {{"Z1", "W", 0.5}, {"W", "X", 0.6}, {"X", "M1", 0.9}, {"M1", "M2", 0.8}, {"M2", "Y", 1.1},
                    {"Z2", "Y", 0.5}, {"Z1", "Z2", 0.3}, {"W", "M2", 0.2}},
                   {}, {}, {}, {"X"}, {"M1"}, {"W"}, "Y", {1.5}, mat(1, 1, {0.3}), mat(1, 1, {0.25}),
                   mat(1, 1, {0.1}), {{"Z2", 0.5}}, {{"M2", {0.0, 2.0}}}});
  specs.push_back({"cyclic_t", {"Z1", "Z2", "X", "Y"},
                   {{"Z1", "Z2", 0.5}, {"Z2", "Z1", 0.3}, {"Z1", "X", 0.7}, {"X", "Y", 1.0}, {"Z2", "Y", 0.4}},
                   {}, {}, {}, {"X"}, {}, {"Z1"}, "Y", {-0.5}, Matrix(1, 0), mat(1, 1, {0.2}),
                   mat(1, 1, {0.6}), {{"Z2", 1.0}}, {{"Z1", {-1.0, 1.0}}}, false});
  specs.push_back({"response_in_f", {"W", "X", "Y", "U1"},
                   {{"W", "X", 0.5}, {"W", "Y", 0.5}, {"X", "Y", 1.0}, {"Y", "U1", 0.5}, {"X", "U1", 0.3}},
                   {}, {}, {}, {"X"}, {"Y"}, {"W"}, "Y", {0.7}, mat(1, 1, {0.5}), mat(1, 1, {-0.1}),
                   mat(1, 1, {0.2}), {{"U1", 1.0}}, {{"Y", {0.0, inf}}}});
  specs.push_back({"intercepts", {"W", "X", "M", "Y"},
                   {{"W", "X", 0.5}, {"X", "M", 1.0}, {"M", "Y", 0.5}, {"X", "Y", 1.0}, {"W", "Y", 0.5}},
                   {{"W", 1.0}, {"X", -0.5}, {"M", 2.0}, {"Y", 3.0}}, {}, {{"M", 2.0}},
                   {"X"}, {"M"}, {"W"}, "Y", {2.0}, mat(1, 1, {0.2}), mat(1, 1, {0.3}), mat(1, 1, {0.3}),
                   {{"M", 2.5}}, {{"W", {0.5, 3.0}}}});
  specs.push_back({"fork_with_u", {"W", "X", "F1", "U1", "U2", "Y"},
                   {{"W", "X", -0.4}, {"X", "F1", 0.7}, {"X", "U1", 0.5}, {"F1", "Y", 0.6}, {"U1", "Y", -0.8},
                    {"U1", "U2", 1.0}, {"W", "U2", 0.3}},
                   {}, {{"F1", "U1", -0.3}}, {}, {"X"}, {"F1"}, {"W"}, "Y", {0.3}, mat(1, 1, {-0.6}),
                   mat(1, 1, {0.4}), mat(1, 1, {0.5}), {{"U2", 0.2}}, {{"F1", {-inf, 0.5}}}});

  std::vector<Fixture> out;
  for (const auto& s : specs) out.push_back(build(s));
  return out;
}

inline const Fixture& by_name(const std::vector<Fixture>& fl, const std::string& name) {
  for (const auto& f : fl)
    if (f.name == name) return f;
  throw std::runtime_error("no fixture " + name);
}

// ---- tabular fixtures ----

inline lincf::TabularModel tabular_basic() {
  lincf::TabularModel m;
  m.treatment = {"X", {"low", "mid", "high"}};
  m.outcome = {"Y", {"0", "1"}};
  m.parents = {{"Z", {"0", "1"}}};
  m.pr_parents = {0.4, 0.6};
  m.pr_x_given_pa = mat(2, 3, {0.5, 0.3, 0.2, 0.1, 0.3, 0.6});
  m.pr_y_given_x_pa = {mat(3, 2, {0.9, 0.1, 0.7, 0.3, 0.4, 0.6}), mat(3, 2, {0.8, 0.2, 0.5, 0.5, 0.2, 0.8})};
  return m;
}

inline lincf::TabularModel tabular_no_parents() {
  lincf::TabularModel m;
  m.treatment = {"X", {"a", "b"}};
  m.outcome = {"Y", {"n", "y"}};
  m.pr_parents = {1.0};
  m.pr_x_given_pa = mat(1, 2, {0.3, 0.7});
  m.pr_y_given_x_pa = {mat(2, 2, {0.6, 0.4, 0.1, 0.9})};
  return m;
}

/// Random tables over two parents, seeded.
inline lincf::TabularModel tabular_random(unsigned seed, Index nx = 4, Index ny = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto normalize = [](std::vector<double> v) {
    double s = 0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
    return v;
  };
  lincf::TabularModel m;
  auto dom = [](const std::string& p, Index n) {
    std::vector<std::string> d;
    for (Index i = 0; i < n; ++i) d.push_back(p + std::to_string(i));
    return d;
  };
  m.treatment = {"X", dom("x", nx)};
  m.outcome = {"Y", dom("y", ny)};
  m.parents = {{"P1", dom("p", 2)}, {"P2", dom("q", 3)}};
  const Index nc = m.n_configs();
  std::vector<double> pp(static_cast<std::size_t>(nc));
  for (auto& v : pp) v = u(rng);
  m.pr_parents = normalize(pp);
  m.pr_x_given_pa = Matrix(nc, nx);
  for (Index c = 0; c < nc; ++c) {
    std::vector<double> r(static_cast<std::size_t>(nx));
    for (auto& v : r) v = u(rng);
    r = normalize(r);
    for (Index x = 0; x < nx; ++x) m.pr_x_given_pa(c, x) = r[std::size_t(x)];
    Matrix t(nx, ny);
    for (Index x = 0; x < nx; ++x) {
      std::vector<double> y(static_cast<std::size_t>(ny));
      for (auto& v : y) v = u(rng);
      y = normalize(y);
      for (Index k = 0; k < ny; ++k) t(x, k) = y[std::size_t(k)];
    }
    m.pr_y_given_x_pa.push_back(t);
  }
  return m;
}

inline std::vector<lincf::TabularModel> tabular_fleet() {
  std::vector<lincf::TabularModel> out{tabular_basic(), tabular_no_parents()};
  for (unsigned s = 1; s <= 5; ++s) out.push_back(tabular_random(s));
  return out;
}

}  // namespace fixtures
