#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cursor/assignment.hpp"
#include "cursor/problems.hpp"
#include "cursor/tensor3.hpp"

namespace cursor {

/// Discretized matching: injective source -> target map plus the soft
/// assignment and solver diagnostics it came from.
struct MatchResult {
  SoftAssignment soft;
  std::vector<std::size_t> assignment;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<double> raw_residual_history;
  std::size_t row_resets = 0;
};

/// Third-order relaxation labeling:
/// x <- (alpha m .* x + (1 - alpha) T x x)^2, rows normalized.
SolveReport prl3_match(const SparseTensor3& t, std::span<const double> m, const SolverConfig& cfg,
                       unsigned threads = 1, const IterateObserver& observer = {});

/// Tensor power iteration x <- T x x / ||T x x||_2 from the all-ones vector,
/// stopped by the same rule as the relaxation solvers. A zero product resets
/// x to the uniform unit vector and ends the run unconverged. The returned
/// soft assignment is row-normalized once at the end.
SolveReport power_match(const SparseTensor3& t, const SolverConfig& cfg, unsigned threads = 1);

/// Maximum-score injective assignment of a nonnegative n1 x n2 matrix
/// (n1 <= n2). Among optimal assignments the lexicographically smallest is
/// returned. Throws PreconditionError when n1 > n2 or an entry is negative
/// or not finite.
std::vector<std::size_t> hungarian(const SoftAssignment& x);

/// Sum of x(i, a(i)).
double assignment_score(const SoftAssignment& x, std::span<const std::size_t> assignment);

/// Hungarian discretization of a solver report.
MatchResult discretize(SolveReport report);

/// Fraction of sources with assignment[i] == truth[i]. Throws
/// PreconditionError when the lengths differ.
double accuracy(std::span<const std::size_t> assignment, const GroundTruth& truth);

}  // namespace cursor
