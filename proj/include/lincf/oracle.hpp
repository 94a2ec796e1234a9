#pragma once

// Twin-world Monte Carlo: the observed world and the counterfactual world
// share every disturbance except those of X, which the plan replaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lincf/counterfactual.hpp"
#include "lincf/evidence.hpp"
#include "lincf/sampling.hpp"

namespace lincf {

struct TwinConfig {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  Family family = Family::Gaussian;
  std::size_t chunk_size = 1 << 16;
  unsigned workers = 0;
};

struct EmpiricalMoments {
  IndexList s_idx;
  std::vector<std::string> labels;
  Vector mean_s;
  Matrix cov_s;
  Vector se_mean;
  Matrix se_cov;
  // T block of the counterfactual world (unchanged by the plan) and its
  // cross-covariance with S
  IndexList t_idx;
  Vector mean_t;
  Matrix cov_st;
  Matrix se_cov_st;
  std::size_t n_samples = 0;
  std::size_t n_accepted = 0;
  double acceptance_rate = 0.0;
  // Moments of the accepted observed-world draws, for the self-consistent
  // comparison mode.
  ConditionalMoments observed;
};

inline EmpiricalMoments simulate_twin(const LinearSem& sem, const Partition& part, const ControlPlan& plan,
                                      const Evidence& ev, const TwinConfig& cfg) {
  if (cfg.n_samples < 1000) fail(ErrorCode::InvalidConfig, "n_samples", "the oracle needs at least 1000 samples");
  if (ev.kind == Evidence::Kind::UserMoments) {
    fail(ErrorCode::InvalidConfig, "evidence", "the oracle samples evidence regions, not user moments");
  }
  plan.validate(part);
  const RealWorldSampler sampler(sem, ev, cfg.family);
  const Index n = sem.size();

  // counterfactual world: X equations replaced by the plan
  Matrix a_mod = sem.coeffs;
  Vector mu_mod = sem.intercepts;
  for (Index r = 0; r < part.n_x(); ++r) {
    const Index xi = part.x[std::size_t(r)];
    a_mod.row(xi).setZero();
    for (Index c = 0; c < part.n_f(); ++c) a_mod(xi, part.f[std::size_t(c)]) = plan.gain_f(r, c);
    for (Index c = 0; c < part.n_w(); ++c) a_mod(xi, part.w[std::size_t(c)]) = plan.gain_w(r, c);
    mu_mod(xi) = plan.x_const(r);
  }
  const double rho_mod = spectral_radius(a_mod);
  if (!convergent(rho_mod)) {
    fail(ErrorCode::NotStable, "plan",
         "counterfactual model is not stable (spectral radius " + std::to_string(rho_mod) + ")");
  }
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - a_mod);
  if (!lu.isInvertible()) fail(ErrorCode::SingularSystem, "plan", "counterfactual system is singular");
  IndexList s = part.s();
  std::sort(s.begin(), s.end());
  IndexList t = part.t();
  std::sort(t.begin(), t.end());
  const IndexList st = concat({s, t});
  IndexList all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[std::size_t(i)] = i;
  const Matrix solve_mod = lu.inverse();
  const Matrix solve_st = select(solve_mod, st, all);
  const Vector offset_st = select(Vector(solve_mod * mu_mod), st);
  const Matrix noise_factor = psd_sqrt(plan.noise_cov);
  const bool imperfect = !plan.is_perfect();
  const Index n_s = Index(s.size());
  const Index n_st = Index(st.size());
  const Index n_x = part.n_x();

  const ChunkPlan chunks_plan{cfg.n_samples, cfg.chunk_size, cfg.workers};
  std::vector<SampleChunk> cf_chunks(chunks_plan.chunks());
  std::vector<SampleChunk> obs_chunks(chunks_plan.chunks());

  for_each_chunk(chunks_plan, [&](std::size_t c) {
    std::mt19937_64 rng(chunk_seed(cfg.seed, c, /*stream=*/2));
    StandardDraw draw_std(cfg.family);
    Vector z(n), eps(n), v(n), z_star(n_x), eps_star(n_x), s_cf(n_st);
    auto& cf = cf_chunks[c];
    auto& obs = obs_chunks[c];
    cf.reserve(n_st, chunks_plan.count(c));
    obs.reserve(n, chunks_plan.count(c));
    for (std::size_t k = 0; k < chunks_plan.count(c); ++k) {
      sampler.draw(rng, draw_std, z, eps, v);
      if (!sampler.accepts(v)) continue;
      if (imperfect) {
        draw_std.fill(rng, z_star);
        eps_star.noalias() = noise_factor * z_star;
      } else {
        eps_star.setZero();
      }
      for (Index r = 0; r < n_x; ++r) eps(part.x[std::size_t(r)]) = eps_star(r);
      s_cf.noalias() = solve_st * eps;
      s_cf += offset_st;
      cf.push(s_cf);
      obs.push(v);
    }
  });

  const SampleSummary cf_sum = summarize(cf_chunks, n_st);
  const double rate = static_cast<double>(cf_sum.n) / static_cast<double>(cfg.n_samples);
  if (rate < kMinAcceptance) {
    fail(ErrorCode::AcceptanceTooLow, "evidence", "acceptance rate " + std::to_string(rate) + " below 1e-4");
  }
  const SampleSummary obs_sum = summarize(obs_chunks, n);

  EmpiricalMoments out;
  out.s_idx = s;
  for (Index i : s) out.labels.push_back(sem.names[std::size_t(i)]);
  const Index n_t = n_st - n_s;
  out.mean_s = cf_sum.mean.head(n_s);
  out.cov_s = cf_sum.cov.topLeftCorner(n_s, n_s);
  out.se_mean = cf_sum.se_mean.head(n_s);
  out.se_cov = cf_sum.se_cov.topLeftCorner(n_s, n_s);
  out.t_idx = t;
  out.mean_t = cf_sum.mean.tail(n_t);
  out.cov_st = cf_sum.cov.topRightCorner(n_s, n_t);
  out.se_cov_st = cf_sum.se_cov.topRightCorner(n_s, n_t);
  out.n_samples = cfg.n_samples;
  out.n_accepted = cf_sum.n;
  out.acceptance_rate = rate;
  out.observed.mean = obs_sum.mean;
  out.observed.cov = obs_sum.cov;
  out.observed.provenance = {Provenance::Kind::UserSupplied, cfg.n_samples, obs_sum.n, cfg.seed, rate, cfg.family,
                             obs_sum.se_mean, obs_sum.se_cov};
  out.observed.warnings = sampler.warnings();
  // point coordinates are exact by construction
  if (ev.kind == Evidence::Kind::Region) {
    const IndexList pts = ev.point_indices();
    const Vector values = ev.point_values();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      out.observed.mean(pts[k]) = values(Index(k));
      out.observed.cov.row(pts[k]).setZero();
      out.observed.cov.col(pts[k]).setZero();
    }
  }
  return out;
}

struct ComparisonEntry {
  std::string label;  // "mean[Y]" or "cov[X,Y]"
  double closed = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;  // worst |z| first
  double max_abs_z = 0.0;
  double k_sigma = 4.0;
  bool pass = true;
};

/// Per-entry z-scores of closed-form against empirical moments. Entries with
/// zero standard error must agree to 1e-9 (relative).
inline ComparisonReport compare(const CounterfactualMoments& closed, const EmpiricalMoments& emp, double k_sigma = 4.0) {
  if (closed.s_idx != emp.s_idx || closed.mean_s.size() != emp.mean_s.size()) {
    fail(ErrorCode::DimensionMismatch, "compare", "closed-form and empirical moments cover different variables");
  }
  ComparisonReport rep;
  rep.k_sigma = k_sigma;
  auto add = [&](std::string label, double c, double e, double se) {
    double z = 0.0;
    const double diff = c - e;
    const double floor = 1e-12 * std::max(1.0, std::abs(c));  // rounding-level SE counts as zero
    if (se > floor) {
      z = diff / se;
    } else if (std::abs(diff) > 1e-9 * std::max(1.0, std::abs(c))) {
      z = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    rep.entries.push_back({std::move(label), c, e, se, z});
  };
  const Index n = closed.mean_s.size();
  for (Index i = 0; i < n; ++i) add("mean[" + closed.labels[std::size_t(i)] + "]", closed.mean_s(i), emp.mean_s(i), emp.se_mean(i));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j)
      add("cov[" + closed.labels[std::size_t(i)] + "," + closed.labels[std::size_t(j)] + "]", closed.cov_s(i, j),
          emp.cov_s(i, j), emp.se_cov(i, j));
  std::stable_sort(rep.entries.begin(), rep.entries.end(),
                   [](const ComparisonEntry& a, const ComparisonEntry& b) { return std::abs(a.z) > std::abs(b.z); });
  rep.max_abs_z = rep.entries.empty() ? 0.0 : std::abs(rep.entries.front().z);
  rep.pass = rep.max_abs_z <= k_sigma;
  return rep;
}

}  // namespace lincf
