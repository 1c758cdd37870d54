#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cursor/assignment.hpp"
#include "cursor/features.hpp"
#include "cursor/problems.hpp"

namespace cursor {

/// Implicit second-order compatibility matrix H of size n1*n2 square.
///
/// H[(i1,j1),(i2,j2)] is the edge kernel for i1 != i2 and j1 != j2 and zero
/// on the diagonal blocks (i1 == i2 or j1 == j2). Entries are computed on
/// demand, never stored.
class CompatMatrix {
 public:
  CompatMatrix(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg) : kernel_(p1, p2, cfg) {}

  std::size_t n1() const { return kernel_.n1(); }
  std::size_t n2() const { return kernel_.n2(); }
  std::size_t dim() const { return kernel_.n1() * kernel_.n2(); }

  double operator()(std::size_t p, std::size_t q) const {
    const std::size_t n2 = kernel_.n2();
    const std::size_t i1 = p / n2, j1 = p % n2;
    const std::size_t i2 = q / n2, j2 = q % n2;
    if (i1 == i2 || j1 == j2) return 0.0;
    return kernel_(i1, i2, j1, j2);
  }

  const EdgeKernel& kernel() const { return kernel_; }

 private:
  EdgeKernel kernel_;
};

/// Sampled column indices I and fitting entries Omega (I x I plus 3c^2
/// uniform draws, deduplicated and sorted).
struct CurSample {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<std::uint32_t> columns;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> omega;
};

/// Throws ConfigError unless 1 <= c <= n1*n2.
CurSample sample_cur(std::size_t n1, std::size_t n2, std::size_t c, std::uint64_t seed);

/// H ~ C * U * C^T with C the sampled columns and U the fitted core.
struct CurFactors {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  Eigen::MatrixXd C;  // (n1*n2) x c
  Eigen::MatrixXd U;  // c x c, symmetric
  std::vector<std::uint32_t> columns;

  std::size_t dim() const { return n1 * n2; }
  std::size_t rank() const { return columns.size(); }
};

Eigen::MatrixXd build_columns(const CompatMatrix& h, const CurSample& sample);
Eigen::MatrixXd build_columns(const PointSet& p1, const PointSet& p2, const CurSample& sample,
                              const FeatureConfig& cfg);

/// H values at every Omega entry, in Omega order.
std::vector<double> omega_values(const CompatMatrix& h, const CurSample& sample);

/// Diagnostics of the core fit.
struct FitReport {
  double lambda = 0.0;
  int iterations = 0;  // 0 for the direct solver
  double relative_residual = 0.0;  // normal-equation residual; unregularized for the direct solver
  bool direct = false;
};

/// Ridge least squares for the core:
///
///   U = argmin sum_{(p,q) in Omega} (H_pq - C_p U C_q^T)^2 + lambda ||U||_F^2
///
/// with lambda = 1e-8 * trace(N) / c^2, N being the normal operator of the
/// unregularized problem. Small cores (c <= 20) are solved directly through
/// a complete orthogonal decomposition followed by two iterated Tikhonov
/// steps, which move the fit toward the minimum-norm least-squares solution;
/// larger ones by conjugate gradients on the normal equations with a
/// Kronecker-factored preconditioner. The result is symmetrized as
/// (U + U^T) / 2.
Eigen::MatrixXd fit_U(const Eigen::MatrixXd& C, std::span<const std::pair<std::uint32_t, std::uint32_t>> omega,
                      std::span<const double> values, FitReport* report = nullptr);

/// Samples, builds C, evaluates Omega and fits U.
CurFactors build_cur(const PointSet& p1, const PointSet& p2, std::size_t c, std::uint64_t seed,
                     const FeatureConfig& cfg, FitReport* report = nullptr);

/// y = C (U (C^T x)). Throws PreconditionError on a length mismatch.
Eigen::VectorXd apply_H(const CurFactors& f, std::span<const double> x);

/// Second-order relaxation labeling with the low-rank H:
/// x <- (alpha m .* x + (1 - alpha) C U C^T x)^2, rows normalized.
SolveReport prl2_match(const CurFactors& f, std::span<const double> m, const SolverConfig& cfg,
                       const IterateObserver& observer = {});

/// Per-source top-k target candidates, stored flat (n1 x k).
struct CandidateSet {
  std::size_t n1 = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> flat;

  std::span<const std::uint32_t> row(std::size_t i) const { return std::span(flat).subspan(i * k, k); }
};

/// k largest entries per row, descending, ties by ascending target index.
/// Throws ConfigError unless 1 <= k <= n2.
CandidateSet top_k(const SoftAssignment& x, std::size_t k);

/// Fraction of source nodes whose true match is among their candidates.
double hit_rate(const CandidateSet& cands, const GroundTruth& truth);

// Binary factor bundle: one line of JSON header {"n1","n2","c","columns",
// "version"} terminated by '\n', then C and U row-major as little-endian f64.
void save_factors(const CurFactors& f, const std::filesystem::path& path);
CurFactors load_factors(const std::filesystem::path& path);

}  // namespace cursor
