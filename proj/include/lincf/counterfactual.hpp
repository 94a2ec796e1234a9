#pragma once

// Abduction / action / prediction in closed form: counterfactual mean and
// covariance of S = F u U under the plan X = x + aF + bW + eps*, given H in R_h.

#include <string>
#include <vector>

#include "lincf/algebra.hpp"
#include "lincf/evidence.hpp"
#include "lincf/sem.hpp"

namespace lincf {

struct DisturbanceMoments {
  Vector mean;
  Matrix cov;
};

/// Updated disturbance moments: mean = (I-A)(mu_{v.r_h} - mu_v),
/// cov = (I-A) Sigma_{vv.r_h} (I-A)'.
inline DisturbanceMoments abduct(const LinearSem& sem, const ConditionalMoments& cm) {
  const Index n = sem.size();
  const Matrix i_minus_a = Matrix::Identity(n, n) - sem.coeffs;
  const Moments base = implied_moments(sem);
  return {i_minus_a * (cm.mean - base.mean), symmetrize(i_minus_a * cm.cov * i_minus_a.transpose())};
}

/// Radius of a * tau_fx (same nonzero spectrum as tau_fx * a).
inline double plan_radius(const TotalEffects& te, const Matrix& gain_f) {
  if (gain_f.size() == 0) return 0.0;
  return spectral_radius(gain_f * te.tau_fx());
}

/// Post-intervention model: X rows hold the plan gains, X intercepts the
/// plan constants and the X disturbances the plan noise, uncorrelated with
/// the abduced disturbances of S and T.
struct ModifiedSem {
  LinearSem model;
  double plan_radius = 0.0;
  double modified_radius = 0.0;
};

inline ModifiedSem act(const LinearSem& sem, const Partition& part, const ControlPlan& plan,
                       const DisturbanceMoments& dm) {
  plan.validate(part);
  if (dm.mean.size() != sem.size() || dm.cov.rows() != sem.size()) {
    fail(ErrorCode::DimensionMismatch, "disturbances", "disturbance moments do not match the model size");
  }
  ModifiedSem out;
  LinearSem& m = out.model;
  m = sem;
  m.dist_mean = dm.mean;
  m.dist_cov = dm.cov;
  for (Index r = 0; r < part.n_x(); ++r) {
    const Index xi = part.x[std::size_t(r)];
    m.coeffs.row(xi).setZero();
    for (Index c = 0; c < part.n_f(); ++c) m.coeffs(xi, part.f[std::size_t(c)]) = plan.gain_f(r, c);
    for (Index c = 0; c < part.n_w(); ++c) m.coeffs(xi, part.w[std::size_t(c)]) = plan.gain_w(r, c);
    m.intercepts(xi) = plan.x_const(r);
    m.dist_mean(xi) = 0.0;
    m.dist_cov.row(xi).setZero();
    m.dist_cov.col(xi).setZero();
  }
  for (Index r = 0; r < part.n_x(); ++r)
    for (Index c = 0; c < part.n_x(); ++c)
      m.dist_cov(part.x[std::size_t(r)], part.x[std::size_t(c)]) = plan.noise_cov(r, c);

  out.plan_radius = plan_radius(total_effects(sem, part), plan.gain_f);
  out.modified_radius = spectral_radius(m.coeffs);
  return out;
}

struct CounterfactualMoments {
  IndexList s_idx;  // model indices of S, ascending
  std::vector<std::string> labels;
  Vector mean_s;
  Matrix cov_s;
  double plan_radius = 0.0;
  Provenance provenance;
  Warnings warnings;
};

namespace detail {

/// Eqs. in canonical (F, U) row order; shared with the optimal-plan module.
struct CanonicalPrediction {
  Vector mean;
  Matrix cov;
  Matrix feedback_inv;  // (I - tau_sx C_xs)^{-1}
  double plan_radius = 0.0;
};

inline CanonicalPrediction predict_canonical(const TotalEffects& te, const Partition& part, const ControlPlan& plan,
                                             const ConditionalMoments& cm) {
  plan.validate(part);
  const Index n_s = part.n_s();
  CanonicalPrediction out;
  out.plan_radius = plan_radius(te, plan.gain_f);
  if (!convergent(out.plan_radius)) {
    fail(ErrorCode::PlanUnstable, "plan.a",
         "radius of a*tau_fx is " + std::to_string(out.plan_radius) + " (must be < 1)");
  }
  const Matrix& tau = te.tau_sx;
  const Matrix feedback = Matrix::Identity(n_s, n_s) - tau * plan.c_xs(part);
  Eigen::FullPivLU<Matrix> lu(feedback);
  if (!lu.isInvertible()) fail(ErrorCode::SingularFeedback, "plan.a", "I - tau_sx C_xs is singular");
  out.feedback_inv = lu.inverse();

  // P = (I, -tau_sx, tau_sx C_xt) acting on (S, X, T) in canonical order
  const IndexList order = part.canonical();
  Matrix proj(n_s, Index(order.size()));
  proj << Matrix::Identity(n_s, n_s), -tau, tau * plan.c_xt(part);
  const Vector mu = select(cm.mean, order);
  const Matrix sigma = select(cm.cov, order, order);

  out.mean = out.feedback_inv * (tau * plan.x_const + proj * mu);
  const Matrix inner = tau * plan.noise_cov * tau.transpose() + proj * sigma * proj.transpose();
  out.cov = symmetrize(out.feedback_inv * inner * out.feedback_inv.transpose());
  return out;
}

}  // namespace detail

/// Counterfactual mean and covariance of S, returned in model order.
inline CounterfactualMoments predict(const LinearSem& sem, const Partition& part, const ControlPlan& plan,
                                     const ConditionalMoments& cm) {
  const TotalEffects te = total_effects(sem, part);
  const auto canon = detail::predict_canonical(te, part, plan, cm);
  const IndexList s = part.s();
  std::vector<Index> perm(s.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = Index(i);
  std::sort(perm.begin(), perm.end(), [&](Index a, Index b) { return s[std::size_t(a)] < s[std::size_t(b)]; });

  CounterfactualMoments out;
  out.plan_radius = canon.plan_radius;
  out.provenance = cm.provenance;
  out.warnings = te.warnings;
  out.warnings.insert(out.warnings.end(), cm.warnings.begin(), cm.warnings.end());
  for (Index p : perm) {
    out.s_idx.push_back(s[std::size_t(p)]);
    out.labels.push_back(sem.names[std::size_t(s[std::size_t(p)])]);
  }
  out.mean_s = select(canon.mean, perm);
  out.cov_s = select(canon.cov, perm, perm);
  return out;
}

/// S-moments of the modified model by direct equilibrium solve; the
/// independent route that predict() must agree with.
inline CounterfactualMoments modified_model_moments(const ModifiedSem& mod, const Partition& part) {
  const Moments m = implied_moments(mod.model);
  IndexList s = part.s();
  std::sort(s.begin(), s.end());
  CounterfactualMoments out;
  out.s_idx = s;
  for (Index i : s) out.labels.push_back(mod.model.names[std::size_t(i)]);
  out.mean_s = select(m.mean, s);
  out.cov_s = select(m.cov, s, s);
  out.plan_radius = mod.plan_radius;
  return out;
}

/// Abduction, action and prediction composed: evidence is conditioned by the
/// matching estimator, then the closed-form prediction is applied.
inline CounterfactualMoments counterfactual_query(const LinearSem& sem, const Partition& part,
                                                  const ControlPlan& plan, const Evidence& ev,
                                                  const BoxConfig& cfg = {}) {
  const auto report = check_stability(sem, part);
  if (!report.stable) {
    fail(ErrorCode::Unstable, "coeffs", "model is not stable (spectral radius " + std::to_string(report.rho_full) + ")");
  }
  auto out = predict(sem, part, plan, condition(sem, ev, cfg));
  out.warnings.insert(out.warnings.end(), report.warnings.begin(), report.warnings.end());
  return out;
}

}  // namespace lincf
