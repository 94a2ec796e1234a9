#pragma once

// Disturbance families, chunked deterministic random streams and the
// sample-moment reduction shared by box conditioning and the twin oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lincf/error.hpp"
#include "lincf/linalg.hpp"

namespace lincf {

enum class Family { Gaussian, Uniform, Laplace };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Uniform: return "uniform";
    case Family::Laplace: return "laplace";
  }
  return "gaussian";
}

inline Family parse_family(std::string_view s) {
  if (s == "gaussian") return Family::Gaussian;
  if (s == "uniform") return Family::Uniform;
  if (s == "laplace") return Family::Laplace;
  fail(ErrorCode::InvalidConfig, std::string(s), "unknown disturbance family '" + std::string(s) + "'");
}

/// Zero-mean, unit-variance scalar draws from one family.
class StandardDraw {
 public:
  explicit StandardDraw(Family family) : family_(family) {}

  template <class Rng>
  double operator()(Rng& rng) {
    switch (family_) {
      case Family::Gaussian:
        return normal_(rng);
      case Family::Uniform:
        return std::sqrt(3.0) * (2.0 * unit_(rng) - 1.0);
      case Family::Laplace: {
        // inverse CDF with scale 1/sqrt(2)
        const double u = unit_(rng) - 0.5;
        const double mag = -std::log1p(-2.0 * std::abs(u)) / std::numbers::sqrt2;
        return u < 0.0 ? -mag : mag;
      }
    }
    return 0.0;
  }

  template <class Rng>
  void fill(Rng& rng, Vector& out) {
    for (Index i = 0; i < out.size(); ++i) out(i) = (*this)(rng);
  }

 private:
  Family family_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of chunk `chunk` in the stream of `seed`; streams are tagged so that
/// independent consumers of one user seed do not share draws.
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + chunk);
}

struct ChunkPlan {
  std::size_t n_samples = 0;
  std::size_t chunk_size = 1 << 16;
  unsigned workers = 0;  // 0 -> hardware concurrency

  std::size_t chunks() const { return chunk_size == 0 ? 0 : (n_samples + chunk_size - 1) / chunk_size; }
  std::size_t begin(std::size_t c) const { return c * chunk_size; }
  std::size_t count(std::size_t c) const { return std::min(chunk_size, n_samples - begin(c)); }
};

/// Runs `body(chunk_index)` for every chunk, spread over worker threads.
/// Bodies write only to per-chunk slots, so the caller can reduce in index
/// order and obtain results independent of the worker count.
inline void for_each_chunk(const ChunkPlan& plan, const std::function<void(std::size_t)>& body) {
  const std::size_t n_chunks = plan.chunks();
  unsigned workers = plan.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_chunks)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < n_chunks; c += workers) body(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Column-per-sample storage for one chunk.
struct SampleChunk {
  Matrix samples;  // dim x n_kept
  std::size_t kept = 0;

  void reserve(Index dim, std::size_t n) { samples.resize(dim, Index(n)); }
  void push(const Vector& v) { samples.col(Index(kept++)) = v; }
};

/// Sample mean and (1/n) covariance with per-entry standard errors.
struct SampleSummary {
  Vector mean;
  Matrix cov;
  Vector se_mean;
  Matrix se_cov;
  std::size_t n = 0;
};

/// Reduces chunks in index order, so the result is bit-identical however the
/// chunks were produced.
inline SampleSummary summarize(const std::vector<SampleChunk>& chunks, Index dim) {
  SampleSummary out;
  for (const auto& c : chunks) out.n += c.kept;
  out.mean = Vector::Zero(dim);
  out.cov = Matrix::Zero(dim, dim);
  out.se_mean = Vector::Zero(dim);
  out.se_cov = Matrix::Zero(dim, dim);
  if (out.n == 0) return out;
  const double n = static_cast<double>(out.n);

  for (const auto& c : chunks) out.mean += c.samples.leftCols(Index(c.kept)).rowwise().sum();
  out.mean /= n;

  // second and fourth central moments
  Matrix m4 = Matrix::Zero(dim, dim);
  Vector d(dim);
  for (const auto& c : chunks) {
    for (Index k = 0; k < Index(c.kept); ++k) {
      d = c.samples.col(k) - out.mean;
      for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j <= i; ++j) {
          const double p = d(i) * d(j);
          out.cov(i, j) += p;
          m4(i, j) += p * p;
        }
      }
    }
  }
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j <= i; ++j) {
      out.cov(i, j) /= n;
      out.cov(j, i) = out.cov(i, j);
      const double v = std::max(0.0, m4(i, j) / n - out.cov(i, j) * out.cov(i, j));
      out.se_cov(i, j) = out.se_cov(j, i) = std::sqrt(v / n);
    }
    out.se_mean(i) = std::sqrt(std::max(0.0, out.cov(i, i)) / n);
  }
  return out;
}

}  // namespace lincf
