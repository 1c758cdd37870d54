#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cursor {

/// Flattened index of the assignment (source i -> target j).
constexpr std::size_t flat_index(std::size_t i, std::size_t j, std::size_t n2) { return i * n2 + j; }

/// Soft-constraint assignment matrix X (n1 x n2), stored row-major so the
/// storage doubles as the flattened vector x. Rows sum to one.
struct SoftAssignment {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<double> x;

  double operator()(std::size_t i, std::size_t j) const { return x[i * n2 + j]; }
  std::span<const double> row(std::size_t i) const { return std::span(x).subspan(i * n2, n2); }
};

struct SolverConfig {
  double alpha = 0.2;
  double tol = 1e-8;
  int max_iter = 100;

  /// Throws ConfigError unless alpha in [0, 1], tol > 0 and max_iter >= 1.
  void validate() const;
};

/// Outcome of an iterative soft-assignment solver.
struct SolveReport {
  SoftAssignment soft;
  int iterations = 0;
  bool converged = false;
  /// ||x(k+1) - x(k)||_2 after row normalization; drives the stopping rule.
  std::vector<double> residuals;
  /// Same difference measured on the unnormalized update.
  std::vector<double> raw_residuals;
  /// Rows reset to uniform because they summed to zero.
  std::size_t row_resets = 0;
};

/// Normalizes every row of the row-major n1 x n2 matrix `x` to sum one.
/// Rows with a zero (or non-finite) sum become uniform. Returns how many
/// rows were reset.
std::size_t normalize_rows(std::span<double> x, std::size_t n1, std::size_t n2);

/// support(x, out) writes the neighbourhood support of x into out.
using SupportFn = std::function<void(std::span<const double>, std::span<double>)>;
/// Called with the iteration number and the normalized iterate.
using IterateObserver = std::function<void(int, const SoftAssignment&)>;

/// Relaxation-labeling iteration shared by the second- and third-order
/// solvers. Starting from the all-ones vector it repeats
///
///   x <- (alpha * m .* x + (1 - alpha) * support(x))^2,  then row-normalize
///
/// until ||x(k+1) - x(k)||_2 <= tol or max_iter updates. An update that had
/// to reset a row is never accepted as converged.
SolveReport relaxation_labeling(std::size_t n1, std::size_t n2, std::span<const double> m,
                                const SolverConfig& cfg, const SupportFn& support,
                                const IterateObserver& observer = {});

}  // namespace cursor
