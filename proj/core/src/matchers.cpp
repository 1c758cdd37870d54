#include "cursor/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cursor/error.hpp"

namespace cursor {

SolveReport prl3_match(const SparseTensor3& t, std::span<const double> m, const SolverConfig& cfg, unsigned threads,
                       const IterateObserver& observer) {
  SupportFn support;
  if (threads <= 1) {
    support = [&t](std::span<const double> x, std::span<double> out) { mode_product_xx(t, x, out); };
  } else {
    support = [&t, threads](std::span<const double> x, std::span<double> out) {
      const auto d = mode_product_xx(t, x, threads);
      std::copy(d.begin(), d.end(), out.begin());
    };
  }
  return relaxation_labeling(t.n1(), t.n2(), m, cfg, support, observer);
}

SolveReport power_match(const SparseTensor3& t, const SolverConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::size_t n = t.dim();
  SolveReport rep;
  rep.soft.n1 = t.n1();
  rep.soft.n2 = t.n2();
  std::vector<double> x(n, 1.0);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    auto y = mode_product_xx(t, x, threads);
    double norm = 0.0;
    for (const double v : y) norm += v * v;
    norm = std::sqrt(norm);
    rep.iterations = it;
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::fill(x.begin(), x.end(), 1.0 / std::sqrt(static_cast<double>(n)));
      ++rep.row_resets;
      break;
    }
    double res = 0.0;
    double raw = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      raw += (y[q] - x[q]) * (y[q] - x[q]);
      y[q] /= norm;
      res += (y[q] - x[q]) * (y[q] - x[q]);
    }
    rep.raw_residuals.push_back(std::sqrt(raw));
    rep.residuals.push_back(std::sqrt(res));
    x.swap(y);
    if (rep.residuals.back() <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.row_resets += normalize_rows(x, t.n1(), t.n2());
  rep.soft.x = std::move(x);
  return rep;
}

namespace {

// Rectangular min-cost assignment (rows <= cols) by shortest augmenting
// paths with potentials. cost is row-major. Returns the column of each row;
// u and v receive the final potentials when given.
std::vector<std::size_t> lap_min(const std::vector<double>& cost, std::size_t rows, std::size_t cols,
                                 std::vector<double>* u_out = nullptr, std::vector<double>* v_out = nullptr) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  std::vector<char> used(cols + 1);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> a(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) a[p[j] - 1] = j - 1;
  }
  if (u_out) u_out->assign(u.begin() + 1, u.end());
  if (v_out) v_out->assign(v.begin() + 1, v.end());
  return a;
}

// Best score of rows [from, n1) over the columns not marked used, together
// with the columns chosen for those rows.
double best_suffix(const SoftAssignment& x, double top, std::size_t from, const std::vector<char>& used,
                   std::vector<std::size_t>& cols_out) {
  const std::size_t rows = x.n1 - from;
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < x.n2; ++j) {
    if (!used[j]) free_cols.push_back(j);
  }
  cols_out.assign(rows, 0);
  if (rows == 0) return 0.0;
  std::vector<double> cost(rows * free_cols.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < free_cols.size(); ++c) cost[r * free_cols.size() + c] = top - x(from + r, free_cols[c]);
  }
  const auto a = lap_min(cost, rows, free_cols.size());
  double score = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    cols_out[r] = free_cols[a[r]];
    score += x(from + r, cols_out[r]);
  }
  return score;
}

}  // namespace

std::vector<std::size_t> hungarian(const SoftAssignment& x) {
  if (x.n1 > x.n2) {
    throw PreconditionError("hungarian needs n1 <= n2, got " + std::to_string(x.n1) + " x " + std::to_string(x.n2));
  }
  if (x.x.size() != x.n1 * x.n2) throw PreconditionError("assignment matrix has the wrong size");
  double top = 0.0;
  for (const double v : x.x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw PreconditionError("hungarian needs finite nonnegative entries");
    top = std::max(top, v);
  }
  const std::size_t n1 = x.n1, n2 = x.n2;
  if (n1 == 0) return {};
  std::vector<double> cost(n1 * n2);
  for (std::size_t q = 0; q < cost.size(); ++q) cost[q] = top - x.x[q];
  std::vector<double> u, v;
  auto a = lap_min(cost, n1, n2, &u, &v);
  const double best = assignment_score(x, a);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  const double tight = 1e-9 * std::max(1.0, top);

  // Lexicographic refinement. Only edges tight under the optimal potentials
  // can appear in an optimal assignment, so those are the only alternatives
  // tried for each row.
  std::vector<char> used(n2, 0);
  double prefix = 0.0;
  std::vector<std::size_t> suffix;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < a[i]; ++j) {
      if (used[j] || cost[i * n2 + j] - u[i] - v[j] > tight) continue;
      used[j] = 1;
      const double total = prefix + x(i, j) + best_suffix(x, top, i + 1, used, suffix);
      used[j] = 0;
      if (total >= best - tol) {
        a[i] = j;
        std::copy(suffix.begin(), suffix.end(), a.begin() + static_cast<std::ptrdiff_t>(i + 1));
        break;
      }
    }
    used[a[i]] = 1;
    prefix += x(i, a[i]);
  }
  return a;
}

double assignment_score(const SoftAssignment& x, std::span<const std::size_t> assignment) {
  if (assignment.size() != x.n1) throw PreconditionError("assignment length does not match the matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) s += x(i, assignment[i]);
  return s;
}

MatchResult discretize(SolveReport report) {
  MatchResult r;
  r.assignment = hungarian(report.soft);
  r.soft = std::move(report.soft);
  r.iterations = report.iterations;
  r.converged = report.converged;
  r.residual_history = std::move(report.residuals);
  r.raw_residual_history = std::move(report.raw_residuals);
  r.row_resets = report.row_resets;
  return r;
}

double accuracy(std::span<const std::size_t> assignment, const GroundTruth& truth) {
  if (assignment.size() != truth.mapping.size()) {
    throw PreconditionError("assignment has " + std::to_string(assignment.size()) + " entries, truth has " +
                            std::to_string(truth.mapping.size()));
  }
  if (assignment.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) hits += assignment[i] == truth.mapping[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(assignment.size());
}

}  // namespace cursor
