#include "cursor/assignment.hpp"

#include <cmath>
#include <string>

#include "cursor/error.hpp"

namespace cursor {

void SolverConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
}

std::size_t normalize_rows(std::span<double> x, std::size_t n1, std::size_t n2) {
  std::size_t resets = 0;
  const double uniform = 1.0 / static_cast<double>(n2);
  for (std::size_t i = 0; i < n1; ++i) {
    auto row = x.subspan(i * n2, n2);
    double sum = 0.0;
    for (const double v : row) sum += v;
    if (sum > 0.0 && std::isfinite(sum)) {
      const double inv = 1.0 / sum;
      for (double& v : row) v *= inv;
    } else {
      for (double& v : row) v = uniform;
      ++resets;
    }
  }
  return resets;
}

namespace {

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double d = a[q] - b[q];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

SolveReport relaxation_labeling(std::size_t n1, std::size_t n2, std::span<const double> m,
                                const SolverConfig& cfg, const SupportFn& support,
                                const IterateObserver& observer) {
  cfg.validate();
  const std::size_t n = n1 * n2;
  if (m.size() != n) throw PreconditionError("first-order vector has length " + std::to_string(m.size()) +
                                             ", expected " + std::to_string(n));
  SolveReport rep;
  rep.soft.n1 = n1;
  rep.soft.n2 = n2;
  std::vector<double> x(n, 1.0);
  std::vector<double> raw_prev(n, 1.0);
  std::vector<double> next(n);
  std::vector<double> delta(n);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    support(x, delta);
    for (std::size_t q = 0; q < n; ++q) {
      const double v = cfg.alpha * m[q] * x[q] + (1.0 - cfg.alpha) * delta[q];
      next[q] = v * v;
    }
    rep.raw_residuals.push_back(diff_norm(next, raw_prev));
    raw_prev = next;

    const std::size_t resets = normalize_rows(next, n1, n2);
    rep.row_resets += resets;
    const double res = diff_norm(next, x);
    rep.residuals.push_back(res);
    x.swap(next);
    rep.iterations = it;
    if (observer) {
      rep.soft.x = x;
      observer(it, rep.soft);
    }
    if (resets == 0 && res <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.soft.x = std::move(x);
  return rep;
}

}  // namespace cursor
