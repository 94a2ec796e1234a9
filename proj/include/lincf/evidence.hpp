#pragma once

// Conditional moments (mu_{v.r_h}, Sigma_{vv.r_h}) of the observed world given
// evidence H in R_h.

#include <cstdint>
#include <random>
#include <string>

#include "lincf/algebra.hpp"
#include "lincf/sampling.hpp"
#include "lincf/sem.hpp"

namespace lincf {

inline constexpr double kMinAcceptance = 1e-4;

struct Provenance {
  enum class Kind { Unconditional, GaussianPoint, MonteCarloBox, UserSupplied };
  Kind kind = Kind::Unconditional;
  // MonteCarloBox only
  std::size_t n_samples = 0;
  std::size_t n_accepted = 0;
  std::uint64_t seed = 0;
  double acceptance_rate = 1.0;
  Family family = Family::Gaussian;
  Vector se_mean;
  Matrix se_cov;
};

inline std::string_view to_string(Provenance::Kind k) {
  switch (k) {
    case Provenance::Kind::Unconditional: return "Unconditional";
    case Provenance::Kind::GaussianPoint: return "GaussianPoint";
    case Provenance::Kind::MonteCarloBox: return "MonteCarloBox";
    case Provenance::Kind::UserSupplied: return "UserSupplied";
  }
  return "Unknown";
}

struct ConditionalMoments {
  Vector mean;
  Matrix cov;
  Provenance provenance;
  Warnings warnings;
};

struct BoxConfig {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  Family family = Family::Gaussian;
  std::size_t chunk_size = 1 << 16;
  unsigned workers = 0;
};

inline ConditionalMoments condition_none(const Moments& m) {
  return {m.mean, m.cov, Provenance{}, {}};
}

/// Joint-Gaussian conditioning on H = h. Conditioned coordinates come out
/// with mean exactly h and zero variance.
inline ConditionalMoments condition_point(const Moments& m, const Evidence& ev) {
  ConditionalMoments cm{m.mean, m.cov, Provenance{Provenance::Kind::GaussianPoint}, {}};
  if (ev.kind == Evidence::Kind::None || ev.indices.empty()) {
    cm.provenance.kind = Provenance::Kind::Unconditional;
    return cm;
  }
  if (ev.kind != Evidence::Kind::Region || !ev.all_degenerate()) {
    fail(ErrorCode::InvalidConfig, "evidence", "condition_point needs point evidence");
  }
  const IndexList& h = ev.indices;
  const Vector values = ev.point_values();
  const Index n = m.mean.size();
  IndexList all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[std::size_t(i)] = i;

  const Matrix s_hh = select(m.cov, h, h);
  const Matrix s_vh = select(m.cov, all, h);
  bool singular = false;
  const Matrix s_hh_inv = inverse_or_pinv(s_hh, singular);
  if (singular) {
    cm.warnings.push_back("SingularEvidenceCov: evidence covariance is singular; used pseudoinverse");
  }
  const Matrix gain = s_vh * s_hh_inv;
  cm.mean = m.mean + gain * (values - select(m.mean, h));
  cm.cov = symmetrize(m.cov - gain * s_vh.transpose());
  for (std::size_t k = 0; k < h.size(); ++k) {
    cm.mean(h[k]) = values(Index(k));
    cm.cov.row(h[k]).setZero();
    cm.cov.col(h[k]).setZero();
  }
  return cm;
}

inline ConditionalMoments condition_user(const Evidence& ev, Index n_v) {
  if (ev.user_mean.size() != n_v || ev.user_cov.rows() != n_v || ev.user_cov.cols() != n_v) {
    fail(ErrorCode::DimensionMismatch, "evidence.moments", "user moments do not match the model size");
  }
  if (!is_symmetric(ev.user_cov) || !is_psd(ev.user_cov)) {
    fail(ErrorCode::NonPsdDistCov, "evidence.moments", "user covariance must be symmetric PSD");
  }
  return {ev.user_mean, ev.user_cov, Provenance{Provenance::Kind::UserSupplied}, {}};
}

/// Draws observed-world states V = (I-A)^{-1}(mu + eps). Degenerate evidence
/// coordinates are imposed exactly by conditioning eps on M_H eps = h - m0_H
/// (Gaussian family only); box coordinates are checked by `accepts`.
class RealWorldSampler {
 public:
  RealWorldSampler(const LinearSem& sem, const Evidence& ev, Family family) : family_(family) {
    const Index n = sem.size();
    const auto report = check_stability(sem);
    if (!report.stable) {
      fail(ErrorCode::NotStable, "coeffs",
           "model is not stable (spectral radius " + std::to_string(report.rho_full) + ")");
    }
    Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - sem.coeffs);
    if (!lu.isInvertible()) fail(ErrorCode::SingularSystem, "coeffs", "I - A is numerically singular");
    solve_ = lu.inverse();
    offset_ = solve_ * (sem.intercepts + sem.dist_mean);
    factor_ = psd_sqrt(sem.dist_cov);
    if (ev.kind == Evidence::Kind::Region) {
      box_idx_ = ev.box_indices();
      for (std::size_t k = 0; k < ev.indices.size(); ++k)
        if (!ev.intervals[k].degenerate()) box_.push_back(ev.intervals[k]);
      point_idx_ = ev.point_indices();
    }
    if (!point_idx_.empty()) {
      if (family != Family::Gaussian) {
        fail(ErrorCode::UnsupportedFamily, std::string(to_string(family)),
             "exact point conditioning is only available for gaussian disturbances");
      }
      IndexList all(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) all[std::size_t(i)] = i;
      m_h_ = select(solve_, point_idx_, all);
      target_ = ev.point_values() - select(offset_, point_idx_);
      const Matrix cross = sem.dist_cov * m_h_.transpose();
      bool singular = false;
      const Matrix inner_inv = inverse_or_pinv(m_h_ * cross, singular);
      if (singular) warnings_.push_back("point evidence has singular covariance; used pseudoinverse");
      kalman_ = cross * inner_inv;
    }
  }

  Index dim() const { return factor_.rows(); }
  Family family() const { return family_; }
  const Warnings& warnings() const { return warnings_; }

  /// Fills eps and v with one draw; z is scratch of size dim().
  template <class Rng>
  void draw(Rng& rng, StandardDraw& draw_std, Vector& z, Vector& eps, Vector& v) const {
    draw_std.fill(rng, z);
    eps.noalias() = factor_ * z;
    if (m_h_.size() != 0) eps.noalias() += kalman_ * (target_ - m_h_ * eps);
    v.noalias() = solve_ * eps;
    v += offset_;
  }

  bool accepts(const Vector& v) const {
    for (std::size_t k = 0; k < box_idx_.size(); ++k)
      if (!box_[k].contains(v(box_idx_[k]))) return false;
    return true;
  }

  const IndexList& point_indices() const { return point_idx_; }

 private:
  Family family_;
  Matrix solve_;
  Vector offset_;
  Matrix factor_;
  IndexList box_idx_;
  std::vector<Interval> box_;
  IndexList point_idx_;
  Matrix m_h_;
  Vector target_;
  Matrix kalman_;
  Warnings warnings_;
};

/// Rejection-sampling estimate of the conditional moments. Chunks use seeds
/// derived from (seed, chunk index), so the result does not depend on the
/// worker count.
inline ConditionalMoments condition_box_mc(const LinearSem& sem, const Evidence& ev, const BoxConfig& cfg) {
  if (ev.kind == Evidence::Kind::UserMoments) {
    fail(ErrorCode::InvalidConfig, "evidence", "condition_box_mc needs region evidence");
  }
  if (cfg.n_samples == 0) fail(ErrorCode::InvalidConfig, "n_samples", "n_samples must be positive");
  const RealWorldSampler sampler(sem, ev, cfg.family);
  const Index n = sampler.dim();
  const ChunkPlan plan{cfg.n_samples, cfg.chunk_size, cfg.workers};
  std::vector<SampleChunk> chunks(plan.chunks());

  for_each_chunk(plan, [&](std::size_t c) {
    std::mt19937_64 rng(chunk_seed(cfg.seed, c, /*stream=*/1));
    StandardDraw draw_std(cfg.family);
    Vector z(n), eps(n), v(n);
    auto& out = chunks[c];
    out.reserve(n, plan.count(c));
    for (std::size_t k = 0; k < plan.count(c); ++k) {
      sampler.draw(rng, draw_std, z, eps, v);
      if (sampler.accepts(v)) out.push(v);
    }
  });

  const SampleSummary summary = summarize(chunks, n);
  const double rate = static_cast<double>(summary.n) / static_cast<double>(cfg.n_samples);
  if (rate < kMinAcceptance) {
    fail(ErrorCode::AcceptanceTooLow, "evidence",
         "acceptance rate " + std::to_string(rate) + " below 1e-4; use point evidence for tiny regions");
  }
  ConditionalMoments cm;
  cm.mean = summary.mean;
  cm.cov = summary.cov;
  cm.provenance = {Provenance::Kind::MonteCarloBox, cfg.n_samples, summary.n, cfg.seed, rate, cfg.family,
                   summary.se_mean, summary.se_cov};
  cm.warnings = sampler.warnings();
  if (!ev.point_indices().empty()) {
    const Vector values = ev.point_values();
    const auto& idx = sampler.point_indices();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      cm.mean(idx[k]) = values(Index(k));
      cm.cov.row(idx[k]).setZero();
      cm.cov.col(idx[k]).setZero();
    }
  }
  return cm;
}

/// Routes evidence to the right estimator: none -> model moments, all-point
/// -> Gaussian conditioning, any interval -> Monte Carlo, user -> as given.
inline ConditionalMoments condition(const LinearSem& sem, const Evidence& ev, const BoxConfig& cfg) {
  switch (ev.kind) {
    case Evidence::Kind::None:
      return condition_none(implied_moments(sem));
    case Evidence::Kind::UserMoments:
      return condition_user(ev, sem.size());
    case Evidence::Kind::Region:
      if (ev.all_degenerate()) return condition_point(implied_moments(sem), ev);
      return condition_box_mc(sem, ev, cfg);
  }
  return condition_none(implied_moments(sem));
}

}  // namespace lincf
