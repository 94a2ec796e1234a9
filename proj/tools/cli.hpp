#pragma once

// Command-line front end. run() is kept in a header so tests can drive it
// in-process with captured streams.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lincf/lincf.hpp"

namespace lincf::cli {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kOracleFailure = 3 };

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string out_path;
  std::string format = "table";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> k_sigma;
  std::optional<double> target_y;
  std::string gain_a_path;
  std::optional<std::string> family;
  bool independent = false;
};

namespace detail {

/// flags > input file > environment > built-in default
struct Settings {
  std::uint64_t seed = 0;
  std::size_t samples = 1'000'000;
  double k_sigma = 4.0;
  std::optional<double> target_y;
  Family family = Family::Gaussian;
};

inline Settings resolve(const RunConfig& rc, const Json& in) {
  Settings s;
  if (const char* env = std::getenv("LINCF_SEED"); env && *env) {
    try {
      s.seed = std::stoull(env);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidConfig, "LINCF_SEED", "not an unsigned integer");
    }
  }
  auto from_file = [&](const char* key) -> const Json* { return in.contains(key) ? &in.at(key) : nullptr; };
  try {
    if (auto* j = from_file("seed")) s.seed = j->get<std::uint64_t>();
    if (auto* j = from_file("samples")) s.samples = j->get<std::size_t>();
    if (auto* j = from_file("k_sigma")) s.k_sigma = j->get<double>();
    if (auto* j = from_file("target_y")) s.target_y = j->get<double>();
    if (auto* j = from_file("family")) s.family = parse_family(j->get<std::string>());
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, "options", e.what());
  }
  if (rc.seed) s.seed = *rc.seed;
  if (rc.samples) s.samples = *rc.samples;
  if (rc.k_sigma) s.k_sigma = *rc.k_sigma;
  if (rc.target_y) s.target_y = rc.target_y;
  if (rc.family) s.family = parse_family(*rc.family);
  return s;
}

inline Json warnings_json(const Warnings& w) {
  Json j = Json::array();
  for (const auto& s : w) j.push_back(s);
  return j;
}

inline Json provenance_json(const Provenance& p) {
  Json j;
  j["kind"] = std::string(to_string(p.kind));
  if (p.kind == Provenance::Kind::MonteCarloBox) {
    j["n_samples"] = p.n_samples;
    j["n_accepted"] = p.n_accepted;
    j["acceptance_rate"] = p.acceptance_rate;
    j["seed"] = p.seed;
    j["family"] = std::string(to_string(p.family));
  }
  return j;
}

inline Json stability_json(const StabilityReport& r) {
  Json j;
  j["rho_full"] = r.rho_full;
  if (r.rho_tt) j["rho_tt"] = *r.rho_tt;
  if (r.rho_xsxs) j["rho_xsxs"] = *r.rho_xsxs;
  j["stable"] = r.stable;
  j["warnings"] = warnings_json(r.warnings);
  return j;
}

inline Json cf_json(const CounterfactualMoments& cf) {
  Json j;
  j["variables"] = cf.labels;
  j["mean"] = to_json(cf.mean_s);
  j["cov"] = to_json(cf.cov_s);
  j["plan_radius"] = cf.plan_radius;
  j["evidence"] = provenance_json(cf.provenance);
  j["warnings"] = warnings_json(cf.warnings);
  return j;
}

inline Json empirical_json(const EmpiricalMoments& e) {
  Json j;
  j["variables"] = e.labels;
  j["mean"] = to_json(e.mean_s);
  j["cov"] = to_json(e.cov_s);
  j["se_mean"] = to_json(e.se_mean);
  j["se_cov"] = to_json(e.se_cov);
  j["n_samples"] = e.n_samples;
  j["n_accepted"] = e.n_accepted;
  j["acceptance_rate"] = e.acceptance_rate;
  return j;
}

inline BoxConfig box_config(const Settings& s) {
  BoxConfig c;
  c.n_samples = s.samples;
  c.seed = s.seed;
  c.family = s.family;
  return c;
}

inline TwinConfig twin_config(const Settings& s) {
  TwinConfig c;
  c.n_samples = s.samples;
  c.seed = s.seed;
  c.family = s.family;
  return c;
}

inline bool has_box(const Evidence& ev) {
  return ev.kind == Evidence::Kind::Region && !ev.all_degenerate();
}

struct Loaded {
  Json in;
  LinearSem sem;
  Settings settings;
};

inline Loaded load(const RunConfig& rc) {
  Loaded l;
  l.in = read_json_file(rc.model_path);
  l.sem = parse_model(l.in);
  l.settings = resolve(rc, l.in);
  return l;
}

inline Json cmd_validate(const Loaded& l, int& code) {
  Json j;
  j["variables"] = l.sem.names;
  j["edges"] = l.sem.edge_count();
  StabilityReport r;
  if (l.in.contains("partition")) {
    const Partition part = parse_partition(l.in, l.sem);
    r = check_stability(l.sem, part);
  } else {
    r = check_stability(l.sem);
  }
  j["stability"] = stability_json(r);
  if (!r.stable) code = kNumerical;
  return j;
}

inline Json cmd_moments(const Loaded& l) {
  const Moments m = implied_moments(l.sem);
  Json j;
  j["variables"] = l.sem.names;
  j["mean"] = to_json(m.mean);
  j["cov"] = to_json(m.cov);
  const Evidence ev = parse_evidence(l.in, l.sem);
  if (ev.kind != Evidence::Kind::None) {
    const ConditionalMoments cm = condition(l.sem, ev, box_config(l.settings));
    j["conditional"] = {{"mean", to_json(cm.mean)},
                        {"cov", to_json(cm.cov)},
                        {"evidence", provenance_json(cm.provenance)},
                        {"warnings", warnings_json(cm.warnings)}};
  }
  return j;
}

inline Json cmd_effects(const Loaded& l) {
  const Partition part = parse_partition(l.in, l.sem);
  const TotalEffects te = total_effects(l.sem, part);
  Json j;
  j["rows"] = names_json(l.sem, part.s());
  j["cols"] = names_json(l.sem, part.x);
  j["tau_sx"] = to_json(te.tau_sx);
  j["walk_sum"] = to_json(walk_sum_effects(l.sem, part));
  j["warnings"] = warnings_json(te.warnings);
  return j;
}

inline Json cmd_counterfactual(const Loaded& l) {
  const Partition part = parse_partition(l.in, l.sem);
  const ControlPlan plan = parse_plan(l.in, part);
  const Evidence ev = parse_evidence(l.in, l.sem);
  return cf_json(counterfactual_query(l.sem, part, plan, ev, box_config(l.settings)));
}

inline Matrix load_gain_a(const std::string& path, const Partition& part) {
  const Json j = read_json_file(path);
  const Json& a = j.is_object() ? (j.contains("a") ? j.at("a") : j.at("plan").at("a")) : j;
  return lincf::detail::as_matrix(a, part.n_x(), part.n_f(), path);
}

inline Json cmd_optimal_plan(const Loaded& l, const RunConfig& rc) {
  const Partition part = parse_partition(l.in, l.sem);
  ControlPlan plan = parse_plan(l.in, part);
  if (!rc.gain_a_path.empty()) plan.gain_f = load_gain_a(rc.gain_a_path, part);
  const Evidence ev = parse_evidence(l.in, l.sem);
  const auto stab = check_stability(l.sem, part);
  if (!stab.stable) fail(ErrorCode::Unstable, "coeffs", "model is not stable");
  const ConditionalMoments cm = condition(l.sem, ev, box_config(l.settings));
  const TotalEffects te = total_effects(l.sem, part);
  const RegressionCoefs coefs = regression_coefs(part, cm);
  OptimalPlanResult r = optimal_plan_moments(l.sem, part, te, coefs, cm, plan.gain_f, plan.x_const, plan.noise_cov);
  Vector x = plan.x_const;
  if (l.settings.target_y) {
    x = solve_target_x(r, *l.settings.target_y, plan.x_const);
    r = optimal_plan_moments(l.sem, part, te, coefs, cm, plan.gain_f, x, plan.noise_cov);
  }
  Json j;
  j["treatments"] = names_json(l.sem, part.x);
  j["plan_f"] = names_json(l.sem, part.f);
  j["plan_w"] = names_json(l.sem, part.w);
  j["response"] = l.sem.names[std::size_t(part.y)];
  j["x"] = to_json(x);
  j["a"] = to_json(plan.gain_f);
  j["b_star"] = to_json(r.b_star);
  j["mean_y"] = r.mean_y;
  j["var_y"] = r.var_y;
  j["effective_coefficient"] = to_json(r.effective);
  j["equation_residual"] = r.residual;
  j["min_norm"] = r.min_norm;
  j["cov_y_w"] = to_json(check_w_decorrelation(l.sem, part, r.plan, cm));
  j["d1"] = to_json(r.d1);
  j["d2"] = to_json(r.d2);
  j["sigma_star"] = to_json(r.sigma_star);
  j["evidence"] = provenance_json(cm.provenance);
  Warnings w = r.warnings;
  w.insert(w.end(), cm.warnings.begin(), cm.warnings.end());
  j["warnings"] = warnings_json(w);
  return j;
}

inline Json cmd_discrete(const Loaded& l) {
  const TabularQuery q = parse_tabular(l.in);
  const TabularModel& m = q.model;
  Json j;
  j["treatment"] = m.treatment.name;
  Json region = Json::array();
  for (Index x : q.region) region.push_back(m.treatment.domain[std::size_t(x)]);
  j["region"] = region;
  j["outcome"] = m.outcome.name + "=" + m.outcome.domain[std::size_t(q.y)];
  j["effect"] = disjunctive_effect(m, q.region, q.y);
  j["observational"] = pr_y_given_region(m, q.region, q.y);
  j["policy"] = to_json(stochastic_policy(m, q.region));
  return j;
}

inline Json cmd_discrete_entry(const RunConfig& rc) {
  Loaded l;
  l.in = read_json_file(rc.model_path);
  return cmd_discrete(l);
}

inline Json cmd_simulate(const Loaded& l) {
  const Partition part = parse_partition(l.in, l.sem);
  const ControlPlan plan = parse_plan(l.in, part);
  const Evidence ev = parse_evidence(l.in, l.sem);
  Json j = empirical_json(simulate_twin(l.sem, part, plan, ev, twin_config(l.settings)));
  j["seed"] = l.settings.seed;
  j["family"] = std::string(to_string(l.settings.family));
  return j;
}

/// Closed form against the twin oracle. Box evidence defaults to the
/// self-consistent mode: the closed form consumes the oracle's accepted
/// observed-world moments.
inline Json cmd_compare(const Loaded& l, const RunConfig& rc, int& code) {
  const Partition part = parse_partition(l.in, l.sem);
  const ControlPlan plan = parse_plan(l.in, part);
  const Evidence ev = parse_evidence(l.in, l.sem);
  const EmpiricalMoments emp = simulate_twin(l.sem, part, plan, ev, twin_config(l.settings));
  CounterfactualMoments closed;
  if (has_box(ev) && !rc.independent) {
    closed = predict(l.sem, part, plan, emp.observed);
  } else {
    closed = counterfactual_query(l.sem, part, plan, ev, box_config(l.settings));
  }
  const ComparisonReport rep = compare(closed, emp, l.settings.k_sigma);
  Json j;
  j["pass"] = rep.pass;
  j["k_sigma"] = rep.k_sigma;
  j["max_abs_z"] = rep.max_abs_z;
  j["mode"] = has_box(ev) ? (rc.independent ? "independent" : "self-consistent") : "exact";
  Json entries = Json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"entry", e.label}, {"closed", e.closed}, {"empirical", e.empirical}, {"se", e.se}, {"z", e.z}});
  j["entries"] = entries;
  j["n_accepted"] = emp.n_accepted;
  j["seed"] = l.settings.seed;
  if (!rep.pass) code = kOracleFailure;
  return j;
}

inline Json error_payload(const Error& e) {
  return {{"error", std::string(to_string(e.code()))},
          {"kind", e.kind() == ErrorKind::Validation ? "validation" : "numerical"},
          {"entity", e.entity()},
          {"message", e.what()}};
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  RunConfig rc;
  CLI::App app{"Linear SEM counterfactuals and optimal control plans"};
  app.require_subcommand(1);
  struct Cmd {
    const char* name;
    const char* help;
  };
  const std::vector<Cmd> cmds = {
      {"validate", "check a model and report spectral radii"},
      {"moments", "implied (and conditional) moments"},
      {"effects", "total effects of the treatments on S"},
      {"counterfactual", "counterfactual moments of S under a plan"},
      {"optimal-plan", "variance-minimising gain b*, optionally for a target mean of Y"},
      {"discrete-disjunctive", "effect of a disjunctive plan on a tabular model"},
      {"simulate", "twin-world Monte Carlo moments of S"},
      {"compare", "closed form against the twin-world oracle"},
  };
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--model", rc.model_path, "input JSON (model, partition, plan, evidence)")->required();
    sub->add_option("--out", rc.out_path, "write the report here instead of stdout");
    sub->add_option("--format", rc.format, "table or json")->check(CLI::IsMember({"table", "json"}));
    sub->add_option("--seed", rc.seed, "random seed (default: $LINCF_SEED or 0)");
    sub->add_option("--samples", rc.samples, "Monte Carlo draws");
    sub->add_option("--k-sigma", rc.k_sigma, "oracle tolerance in standard errors");
    sub->add_option("--target-y", rc.target_y, "target mean of the response");
    sub->add_option("--gain-a", rc.gain_a_path, "JSON file holding the feedback gain a");
    sub->add_option("--family", rc.family, "disturbance family")
        ->check(CLI::IsMember({"gaussian", "uniform", "laplace"}));
    sub->add_flag("--independent", rc.independent, "compare: condition the closed form on an independent run");
    sub->callback([&rc, name = std::string(c.name)] { rc.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::Error& e) {
    err << dump_report({{"error", "ParseError"}, {"kind", "validation"}, {"entity", "argv"}, {"message", e.what()}});
    return kValidation;
  }

  int code = kOk;
  try {
    Json report;
    if (rc.command == "discrete-disjunctive") {
      report = cmd_discrete_entry(rc);
    } else {
      const Loaded l = load(rc);
      if (rc.command == "validate") report = cmd_validate(l, code);
      else if (rc.command == "moments") report = cmd_moments(l);
      else if (rc.command == "effects") report = cmd_effects(l);
      else if (rc.command == "counterfactual") report = cmd_counterfactual(l);
      else if (rc.command == "optimal-plan") report = cmd_optimal_plan(l, rc);
      else if (rc.command == "simulate") report = cmd_simulate(l);
      else if (rc.command == "compare") report = cmd_compare(l, rc, code);
    }
    const std::string text = rc.format == "json" ? dump_report(report) : dump_table(report);
    if (rc.out_path.empty()) {
      out << text;
    } else {
      std::ofstream f(rc.out_path);
      if (!f) fail(ErrorCode::InvalidConfig, rc.out_path, "cannot write output file");
      f << text;
    }
    if (code == kNumerical) {
      err << dump_report({{"error", "Unstable"}, {"kind", "numerical"}, {"entity", "coeffs"},
                          {"message", "model is not stable"}});
    }
    return code;
  } catch (const Error& e) {
    err << dump_report(error_payload(e));
    return e.kind() == ErrorKind::Validation ? kValidation : kNumerical;
  } catch (const std::exception& e) {
    err << dump_report({{"error", "InternalInconsistency"}, {"kind", "numerical"}, {"entity", ""},
                        {"message", e.what()}});
    return kNumerical;
  }
}

}  // namespace lincf::cli
