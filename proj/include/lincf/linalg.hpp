#pragma once

// Small dense linear-algebra helpers shared by the modules. Matrices are tiny
// (tens of variables), so everything here favours robustness over speed.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "lincf/error.hpp"

namespace lincf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

/// Strongly connected components of the nonzero pattern of m (edge j -> i
/// when m(i, j) != 0), Tarjan's algorithm.
inline std::vector<std::vector<Index>> strongly_connected_components(const Matrix& m) {
  const Index n = m.rows();
  std::vector<Index> index(std::size_t(n), -1), low(std::size_t(n), 0), stack;
  std::vector<bool> on_stack(std::size_t(n), false);
  std::vector<std::vector<Index>> out;
  Index counter = 0;
  auto visit = [&](auto&& self, Index v) -> void {
    index[std::size_t(v)] = low[std::size_t(v)] = counter++;
    stack.push_back(v);
    on_stack[std::size_t(v)] = true;
    for (Index w = 0; w < n; ++w) {
      if (m(w, v) == 0.0) continue;
      if (index[std::size_t(w)] < 0) {
        self(self, w);
        low[std::size_t(v)] = std::min(low[std::size_t(v)], low[std::size_t(w)]);
      } else if (on_stack[std::size_t(w)]) {
        low[std::size_t(v)] = std::min(low[std::size_t(v)], index[std::size_t(w)]);
      }
    }
    if (low[std::size_t(v)] == index[std::size_t(v)]) {
      std::vector<Index> comp;
      Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[std::size_t(w)] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (Index v = 0; v < n; ++v)
    if (index[std::size_t(v)] < 0) visit(visit, v);
  return out;
}

/// Largest |eigenvalue|. The spectrum is the union of the spectra of the
/// strongly connected blocks, so acyclic patterns give exactly 0 and only
/// cyclic blocks go through an eigen-decomposition. Empty matrix -> 0.
inline double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  double rho = 0.0;
  for (const auto& comp : strongly_connected_components(m)) {
    const Index k = Index(comp.size());
    if (k == 1) {
      rho = std::max(rho, std::abs(m(comp[0], comp[0])));
      continue;
    }
    Matrix block(k, k);
    for (Index r = 0; r < k; ++r)
      for (Index c = 0; c < k; ++c) block(r, c) = m(comp[std::size_t(r)], comp[std::size_t(c)]);
    Eigen::EigenSolver<Matrix> es(block, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
      fail(ErrorCode::EigenFailure, "", "eigenvalue iteration did not converge");
    }
    rho = std::max(rho, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return rho;
}

inline bool is_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::EigenFailure, "", "symmetric eigen-decomposition failed");
  }
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Matrix& m, double tol = kPsdTol) {
  const double scale = m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
  return min_symmetric_eigenvalue(m) >= -tol * scale;
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Symmetric square root L with L L' = m; negative eigenvalues clipped at 0.
inline Matrix psd_sqrt(const Matrix& m) {
  if (m.size() == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::EigenFailure, "", "symmetric eigen-decomposition failed");
  }
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
inline Matrix pinv(const Matrix& m, double rel_tol = 1e-12) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * std::max<double>(m.rows(), m.cols()) * s(0);
  Vector inv = s;
  for (Index i = 0; i < s.size(); ++i) inv(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// 2-norm condition number; +inf for singular input.
inline double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// Inverse of a symmetric block, falling back to the pseudoinverse when the
/// block is numerically singular. Sets `singular` accordingly.
inline Matrix inverse_or_pinv(const Matrix& m, bool& singular, double cond_limit = 1e12) {
  singular = false;
  if (m.size() == 0) return Matrix(0, 0);
  if (condition_number(m) > cond_limit) {
    singular = true;
    return pinv(m);
  }
  return m.fullPivLu().inverse();
}

inline Matrix select(const Matrix& m, std::span<const Index> rows, std::span<const Index> cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(Index(i), Index(j)) = m(rows[i], cols[j]);
  return out;
}

inline Vector select(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(Index(i)) = v(idx[i]);
  return out;
}

inline IndexList concat(std::initializer_list<std::span<const Index>> parts) {
  IndexList out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace lincf
