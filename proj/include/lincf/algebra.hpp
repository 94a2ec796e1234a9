#pragma once

// Stability diagnosis, equilibrium moments and total effects.

#include <optional>
#include <string>

#include "lincf/linalg.hpp"
#include "lincf/sem.hpp"

namespace lincf {

/// Required margin below 1 for a spectral radius to count as convergent.
inline constexpr double kStabilityTol = 1e-9;
inline constexpr double kNearUnitRadius = 0.99;
inline constexpr double kConditionWarn = 1e12;

struct StabilityReport {
  double rho_full = 0.0;
  std::optional<double> rho_tt;    // set when a partition is supplied
  std::optional<double> rho_xsxs;
  bool stable = false;
  Warnings warnings;
};

inline bool convergent(double rho) { return rho < 1.0 - kStabilityTol; }

/// Model-only check: spectral radius of A_vv.
inline StabilityReport check_stability(const LinearSem& sem) {
  StabilityReport r;
  r.rho_full = spectral_radius(sem.coeffs);
  r.stable = convergent(r.rho_full);
  if (r.rho_full > kNearUnitRadius) {
    r.warnings.push_back("spectral radius " + std::to_string(r.rho_full) + " is close to or above 1");
  }
  return r;
}

/// Block check: A_vv is block triangular in the (S,X | T) split, so its
/// spectrum is the union of the spectra of A_tt and A_{xs,xs}.
inline StabilityReport check_stability(const LinearSem& sem, const Partition& part) {
  StabilityReport r = check_stability(sem);
  const IndexList xs = concat({part.s(), part.x});
  const IndexList t = part.t();
  r.rho_tt = spectral_radius(select(sem.coeffs, t, t));
  r.rho_xsxs = spectral_radius(select(sem.coeffs, xs, xs));
  r.stable = convergent(std::max(*r.rho_tt, *r.rho_xsxs));
  return r;
}

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Equilibrium moments: mu_v = (I-A)^{-1} (mu_pa + mean(eps)),
/// Sigma_vv = (I-A)^{-1} Sigma_ee (I-A)'^{-1}.
inline Moments implied_moments(const LinearSem& sem) {
  const auto report = check_stability(sem);
  if (!report.stable) {
    fail(ErrorCode::Unstable, "coeffs",
         "path-coefficient matrix is not convergent (spectral radius " + std::to_string(report.rho_full) + ")");
  }
  const Index n = sem.size();
  const Matrix i_minus_a = Matrix::Identity(n, n) - sem.coeffs;
  Eigen::FullPivLU<Matrix> lu(i_minus_a);
  if (!lu.isInvertible()) fail(ErrorCode::SingularSystem, "coeffs", "I - A is numerically singular");
  Moments m;
  m.mean = lu.solve(Vector(sem.intercepts + sem.dist_mean));
  const Matrix half = lu.solve(sem.dist_cov);
  m.cov = symmetrize(lu.solve(Matrix(half.transpose())).transpose());
  return m;
}

/// tau_sx = (I - A_ss)^{-1} A_sx, rows in (F, U) order.
struct TotalEffects {
  Matrix tau_sx;
  Index n_f = 0;
  Index y_row = 0;
  Warnings warnings;

  Matrix tau_fx() const { return tau_sx.topRows(n_f); }
  Matrix tau_ux() const { return tau_sx.bottomRows(tau_sx.rows() - n_f); }
  Eigen::RowVectorXd tau_yx() const { return tau_sx.row(y_row); }
};

inline TotalEffects total_effects(const LinearSem& sem, const Partition& part) {
  const IndexList s = part.s();
  const Matrix a_ss = select(sem.coeffs, s, s);
  const Matrix a_sx = select(sem.coeffs, s, part.x);
  const double rho = spectral_radius(a_ss);
  if (!convergent(rho)) {
    fail(ErrorCode::Unstable, "A_ss", "A_ss is not convergent (spectral radius " + std::to_string(rho) + ")");
  }
  TotalEffects te;
  te.n_f = part.n_f();
  te.y_row = part.y_in_s();
  const Matrix i_minus = Matrix::Identity(a_ss.rows(), a_ss.cols()) - a_ss;
  const double cond = condition_number(i_minus);
  if (cond > kConditionWarn) {
    te.warnings.push_back("I - A_ss is ill-conditioned (condition number " + std::to_string(cond) + ")");
  }
  te.tau_sx = i_minus.fullPivLu().solve(a_sx);
  return te;
}

/// Sum over all directed walks X_j -> S_i that avoid the other treatments;
/// unlike tau_sx, walks may return to X_j through feedback. Equals tau_sx
/// whenever no cycle passes through X_j.
inline Matrix walk_sum_effects(const LinearSem& sem, const Partition& part) {
  const IndexList s = part.s();
  Matrix out(part.n_s(), part.n_x());
  for (Index j = 0; j < part.n_x(); ++j) {
    const IndexList nodes = concat({s, std::span<const Index>(&part.x[std::size_t(j)], 1)});
    const Matrix a = select(sem.coeffs, nodes, nodes);
    const double rho = spectral_radius(a);
    if (!convergent(rho)) {
      fail(ErrorCode::Unstable, sem.names[std::size_t(part.x[std::size_t(j)])],
           "walk sum diverges (spectral radius " + std::to_string(rho) + ")");
    }
    const Index k = a.rows();
    Vector unit = Vector::Zero(k);
    unit(k - 1) = 1.0;
    const Vector col = (Matrix::Identity(k, k) - a).fullPivLu().solve(unit);
    out.col(j) = col.head(part.n_s());
  }
  return out;
}

}  // namespace lincf
