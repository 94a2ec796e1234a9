#pragma once

// Variance-minimising covariate gain b* for a given feedback gain a, the
// Sigma* decomposition of the response variance, target-value solving and the
// W-decorrelation check.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lincf/algebra.hpp"
#include "lincf/counterfactual.hpp"
#include "lincf/evidence.hpp"

namespace lincf {

inline constexpr double kEquationTol = 1e-8;

/// Conditional regression coefficients, S rows in (F, U) order.
struct RegressionCoefs {
  Matrix b_sx;  // Sigma_sx Sigma_xx^{-1}
  Matrix b_sw;  // Sigma_sw Sigma_ww^{-1}
  Matrix b_xw;  // Sigma_xw Sigma_ww^{-1}
  Index n_f = 0;
  Index y_row = 0;
  Warnings warnings;

  Matrix b_fw() const { return b_sw.topRows(n_f); }
  Eigen::RowVectorXd b_yw() const { return b_sw.row(y_row); }
};

inline RegressionCoefs regression_coefs(const Partition& part, const ConditionalMoments& cm) {
  const IndexList s = part.s();
  RegressionCoefs rc;
  rc.n_f = part.n_f();
  rc.y_row = part.y_in_s();
  bool singular = false;
  const Matrix xx_inv = inverse_or_pinv(select(cm.cov, part.x, part.x), singular);
  if (singular) rc.warnings.push_back("Sigma_xx.r_h is singular; used pseudoinverse");
  const Matrix ww_inv = inverse_or_pinv(select(cm.cov, part.w, part.w), singular);
  if (singular) rc.warnings.push_back("Sigma_ww.r_h is singular; used pseudoinverse");
  rc.b_sx = select(cm.cov, s, part.x) * xx_inv;
  rc.b_sw = select(cm.cov, s, part.w) * ww_inv;
  rc.b_xw = select(cm.cov, part.x, part.w) * ww_inv;
  return rc;
}

namespace detail {

/// (I - a tau_fx)^{-1} a, n_x x n_f.
inline Matrix loop_gain(const TotalEffects& te, const Matrix& a) {
  const Index n_x = a.rows();
  if (a.cols() == 0) return Matrix::Zero(n_x, 0);
  return (Matrix::Identity(n_x, n_x) - a * te.tau_fx()).fullPivLu().solve(a);
}

inline void require_admissible(const TotalEffects& te, const Matrix& a) {
  const double rho = plan_radius(te, a);
  if (!convergent(rho)) {
    fail(ErrorCode::InadmissibleGain, "plan.a",
         "radius of tau_fx*a is " + std::to_string(rho) + "; feedback gain must keep it below 1");
  }
}

/// Left-hand side of the optimality condition for gain b (1 x n_w).
inline Eigen::RowVectorXd optimality_residual(const TotalEffects& te, const RegressionCoefs& rc, const Matrix& a,
                                              const Matrix& b) {
  const Eigen::RowVectorXd g = te.tau_yx() * loop_gain(te, a);
  const Matrix delta = b - rc.b_xw;
  return g * (te.tau_fx() * delta + rc.b_fw()) + te.tau_yx() * delta + rc.b_yw();
}

}  // namespace detail

struct OptimalGain {
  Matrix b;
  double residual = 0.0;
  bool min_norm = false;  // the condition had more than one solution
  Warnings warnings;
};

/// Solves M (b - B_xw) = -(G B_fw + B_yw) with G = tau_yx (I - a tau_fx)^{-1} a
/// and M = G tau_fx + tau_yx; the minimum-Frobenius-norm solution when n_x > 1.
inline OptimalGain solve_optimal_b(const TotalEffects& te, const RegressionCoefs& rc, const Matrix& a) {
  detail::require_admissible(te, a);
  const Eigen::RowVectorXd g = te.tau_yx() * detail::loop_gain(te, a);
  const Eigen::RowVectorXd m = g * te.tau_fx() + te.tau_yx();
  const Eigen::RowVectorXd rhs = -(g * rc.b_fw() + rc.b_yw());

  OptimalGain out;
  out.min_norm = m.size() > 1;
  const double mm = m.squaredNorm();
  if (mm <= 1e-24) {
    out.b = rc.b_xw;
    out.warnings.push_back("DegenerateM: the response does not depend on the treatments; b* = B_xw");
    return out;
  }
  out.b = rc.b_xw + m.transpose() * rhs / mm;
  const Eigen::RowVectorXd res = detail::optimality_residual(te, rc, a, out.b);
  out.residual = res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
  if (out.min_norm) out.warnings.push_back("optimal gain not unique; returned minimum-norm solution");
  return out;
}

/// Sigma*_ss = Sigma_ss + tau Sigma_ee* tau' - B_sx Sigma_xx B_sx'
///   + (tau - B_sx) Sigma_xx (tau - B_sx)' - (B_sw - tau B_xw) Sigma_ww (B_sw - tau B_xw)',
/// all conditional blocks taken given H in R_h.
inline Matrix compute_sigma_star(const TotalEffects& te, const RegressionCoefs& rc, const Partition& part,
                                 const ConditionalMoments& cm, const Matrix& plan_noise) {
  const IndexList s = part.s();
  const Matrix& tau = te.tau_sx;
  const Matrix s_xx = select(cm.cov, part.x, part.x);
  const Matrix s_ww = select(cm.cov, part.w, part.w);
  const Matrix dx = tau - rc.b_sx;
  const Matrix dw = rc.b_sw - tau * rc.b_xw;
  const Matrix out = select(cm.cov, s, s) + tau * plan_noise * tau.transpose() -
                     rc.b_sx * s_xx * rc.b_sx.transpose() + dx * s_xx * dx.transpose() -
                     dw * s_ww * dw.transpose();
  return symmetrize(out);
}

struct OptimalPlanResult {
  Matrix b_star;
  ControlPlan plan;
  double mean_y = 0.0;
  double var_y = 0.0;
  Matrix sigma_star;  // canonical (F, U) order
  Matrix d1;          // I + tau_fx (I - a tau_fx)^{-1} a
  Matrix d2;          // tau_ux (I - a tau_fx)^{-1} a
  double residual = 0.0;
  bool min_norm = false;
  // mean_y(x) = mean_offset + effective * x
  Eigen::RowVectorXd effective;
  double mean_offset = 0.0;
  Warnings warnings;
};

namespace detail {

inline double theorem_mean(const TotalEffects& te, const Partition& part, const ConditionalMoments& cm,
                           const Matrix& a, const Matrix& b, const Vector& x) {
  const Eigen::RowVectorXd g = te.tau_yx() * loop_gain(te, a);
  const Vector shift = x - select(cm.mean, part.x) + b * select(cm.mean, part.w);
  const Vector mu_f = select(cm.mean, part.f);
  return cm.mean(part.y) + te.tau_yx().dot(shift) + g.dot(mu_f + te.tau_fx() * shift);
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Mean and variance of Y under the optimal plan (x, a, b*), from the
/// Sigma* form, cross-checked against the general prediction formulas.
inline OptimalPlanResult optimal_plan_moments(const LinearSem& sem, const Partition& part, const TotalEffects& te,
                                              const RegressionCoefs& rc, const ConditionalMoments& cm,
                                              const Matrix& a, const Vector& x_const, const Matrix& plan_noise) {
  const OptimalGain gain = solve_optimal_b(te, rc, a);
  OptimalPlanResult r;
  r.b_star = gain.b;
  r.residual = gain.residual;
  r.min_norm = gain.min_norm;
  r.warnings = te.warnings;
  r.warnings.insert(r.warnings.end(), rc.warnings.begin(), rc.warnings.end());
  r.warnings.insert(r.warnings.end(), gain.warnings.begin(), gain.warnings.end());
  r.plan = ControlPlan{x_const, a, gain.b, plan_noise};
  r.plan.validate(part);

  const Index n_f = part.n_f();
  const Matrix loop = detail::loop_gain(te, a);
  r.d1 = Matrix::Identity(n_f, n_f) + te.tau_fx() * loop;
  r.d2 = te.tau_ux() * loop;
  const Eigen::RowVectorXd g = te.tau_yx() * loop;

  r.mean_y = detail::theorem_mean(te, part, cm, a, gain.b, x_const);
  r.effective = te.tau_yx() + g * te.tau_fx();
  r.mean_offset = detail::theorem_mean(te, part, cm, a, gain.b, Vector::Zero(part.n_x()));

  r.sigma_star = compute_sigma_star(te, rc, part, cm, plan_noise);
  const Index y = part.y_in_s();
  const double s_yy = r.sigma_star(y, y);
  if (n_f == 0) {
    r.var_y = s_yy;
  } else {
    const IndexList f_rows = [&] {
      IndexList v(static_cast<std::size_t>(n_f));
      for (Index i = 0; i < n_f; ++i) v[std::size_t(i)] = i;
      return v;
    }();
    const IndexList y_row{y};
    const Matrix s_ff = select(r.sigma_star, f_rows, f_rows);
    const Eigen::RowVectorXd s_yf = select(r.sigma_star, y_row, f_rows);
    bool singular = false;
    const Matrix s_ff_inv = inverse_or_pinv(s_ff, singular);
    if (singular) r.warnings.push_back("Sigma*_ff is singular; used pseudoinverse");
    const Eigen::RowVectorXd reg = s_yf * s_ff_inv;
    const Eigen::RowVectorXd lead = g + reg;
    r.var_y = s_yy - reg.dot(s_yf) + lead * s_ff * lead.transpose();
  }
  // Zero at b*; only nonzero when the optimality condition has no solution.
  const Eigen::RowVectorXd resid = detail::optimality_residual(te, rc, a, gain.b);
  if (resid.size() != 0) r.var_y += resid * select(cm.cov, part.w, part.w) * resid.transpose();
  if (r.var_y < -kEquationTol) {
    fail(ErrorCode::InternalInconsistency, "var_y", "negative response variance " + std::to_string(r.var_y));
  }

  const auto check = detail::predict_canonical(te, part, r.plan, cm);
  if (!detail::close(r.mean_y, check.mean(y), kEquationTol) || !detail::close(r.var_y, check.cov(y, y), kEquationTol)) {
    fail(ErrorCode::InternalInconsistency, sem.names[std::size_t(part.y)],
         "optimal-plan moments disagree with the general prediction (mean " + std::to_string(r.mean_y) + " vs " +
             std::to_string(check.mean(y)) + ", var " + std::to_string(r.var_y) + " vs " +
             std::to_string(check.cov(y, y)) + ")");
  }
  return r;
}

/// Plan constant x giving E(Y) = y0: the reference x_ref plus the
/// minimum-norm adjustment (x_ref = 0 yields the minimum-norm x).
inline Vector solve_target_x(const OptimalPlanResult& r, double y0, std::optional<Vector> x_ref = std::nullopt) {
  const Vector ref = x_ref.value_or(Vector::Zero(r.effective.size()));
  if (ref.size() != r.effective.size()) {
    fail(ErrorCode::DimensionMismatch, "x_ref", "reference plan constant has the wrong length");
  }
  const double current = r.mean_offset + r.effective.dot(ref);
  const double cc = r.effective.squaredNorm();
  if (cc <= 1e-24) {
    if (detail::close(current, y0, 1e-12)) return ref;
    fail(ErrorCode::UnreachableTarget, "target_y",
         "treatments have no effect on the response; mean is fixed at " + std::to_string(current));
  }
  return ref + r.effective.transpose() * ((y0 - current) / cc);
}

/// cov(Y, W | do(plan), H in R_h) = row Y of
/// (I - tau C_xs)^{-1} (tau b + B_sw - tau B_xw) Sigma_ww.
inline Eigen::RowVectorXd check_w_decorrelation(const LinearSem& sem, const Partition& part, const ControlPlan& plan,
                                                const ConditionalMoments& cm) {
  plan.validate(part);
  if (part.n_w() == 0) return Eigen::RowVectorXd(0);
  const TotalEffects te = total_effects(sem, part);
  const RegressionCoefs rc = regression_coefs(part, cm);
  const Index n_s = part.n_s();
  const Matrix& tau = te.tau_sx;
  const Matrix feedback_inv = (Matrix::Identity(n_s, n_s) - tau * plan.c_xs(part)).fullPivLu().inverse();
  const Matrix cov_sw =
      feedback_inv * (tau * plan.gain_w + rc.b_sw - tau * rc.b_xw) * select(cm.cov, part.w, part.w);
  return cov_sw.row(part.y_in_s());
}

/// Radius of (s * a) tau_fx for each scale s, to help pick an admissible a.
inline std::vector<double> gain_radius_profile(const TotalEffects& te, const Matrix& a,
                                               const std::vector<double>& scales) {
  std::vector<double> out;
  out.reserve(scales.size());
  for (double s : scales) out.push_back(plan_radius(te, Matrix(s * a)));
  return out;
}

}  // namespace lincf
