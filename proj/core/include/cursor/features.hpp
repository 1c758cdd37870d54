#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cursor/problems.hpp"

namespace cursor {

/// Kernel bandwidths. An empty value means "auto":
///   gamma0: inverse mean source-target point distance (1 if that mean is 0)
///   gamma2: 1
///   gamma3: inverse mean squared feature distance over 1000 seeded random
///           hyperedge pairs (1 if that mean is 0)
struct FeatureConfig {
  std::optional<double> gamma0;
  std::optional<double> gamma2;
  std::optional<double> gamma3;
  /// Weight in [0, 1] of the edge-vector term in the second-order kernel.
  double edge_orientation = 0.5;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Dense first-order compatibilities M[i][j] = exp(-gamma0 * |p1_i - p2_j|),
/// stored row-major so that the storage is also the flattened vector m.
struct FirstOrderCompat {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double gamma0 = 1.0;
  std::vector<double> m;

  double operator()(std::size_t i, std::size_t j) const { return m[i * n2 + j]; }
};

FirstOrderCompat first_order(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg);

/// Second-order edge kernel
///
///   exp(-gamma2 * ((1 - w) * |d1 - d2| + w * |e1 - e2|) / sigma_d)
///
/// with d the edge lengths, e the edge vectors (i2 - i1, j2 - j1) and w the
/// edge_orientation weight. w = 0 is the rotation-invariant length kernel;
/// larger w trades rotation invariance for discrimination.
///
/// sigma_d is the mean of the two graphs' mean edge lengths, which keeps the
/// kernel unchanged when the graphs swap roles. Both distance tables are
/// cached, so evaluation is O(1).
class EdgeKernel {
 public:
  EdgeKernel(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  double gamma2() const { return gamma2_; }
  double sigma_d() const { return sigma_d_; }

  double edge_orientation() const { return beta_; }

  double operator()(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const {
    const double len = std::abs(d1_[i1 * n1_ + i2] - d2_[j1 * n2_ + j2]);
    if (beta_ == 0.0) return std::exp(-scale_ * len);
    const double ex = (x1_[i2] - x1_[i1]) - (x2_[j2] - x2_[j1]);
    const double ey = (y1_[i2] - y1_[i1]) - (y2_[j2] - y2_[j1]);
    return std::exp(-scale_ * ((1.0 - beta_) * len + beta_ * std::sqrt(ex * ex + ey * ey)));
  }

 private:
  std::size_t n1_;
  std::size_t n2_;
  double gamma2_;
  double sigma_d_;
  double scale_;
  double beta_;
  std::vector<double> d1_;
  std::vector<double> d2_;
  std::vector<double> x1_, y1_, x2_, y2_;
};

/// Single edge compatibility. Builds an EdgeKernel, so prefer the kernel in
/// loops. Throws PreconditionError when i1 == i2 or j1 == j2.
double edge_compat(const PointSet& p1, const PointSet& p2, std::array<std::size_t, 2> src,
                   std::array<std::size_t, 2> tgt, const FeatureConfig& cfg);

/// Sines of the interior angles at the three vertices, in vertex order.
using HyperedgeFeature = std::array<double, 3>;

/// Twice the area of triangle (a, b, c), evaluated with the vertices in
/// ascending index order so that every permutation of a triple yields the
/// same bits.
inline double twice_area(std::span<const Point> pts, std::size_t a, std::size_t b, std::size_t c) {
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  const Point& p = pts[a];
  const Point& q = pts[b];
  const Point& r = pts[c];
  return std::abs((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x));
}

/// Triangle sines from twice the area and the side lengths. Degenerate
/// triangles (a zero side or zero area) map to (0, 0, 0).
inline HyperedgeFeature triangle_sines(double area2, double ab, double ac, double bc) {
  if (ab == 0.0 || ac == 0.0 || bc == 0.0) return {0.0, 0.0, 0.0};
  return {std::min(1.0, area2 / (ab * ac)), std::min(1.0, area2 / (ab * bc)), std::min(1.0, area2 / (ac * bc))};
}

/// Throws PreconditionError on repeated or out-of-range indices.
HyperedgeFeature hyperedge_feature(const PointSet& ps, std::array<std::size_t, 3> triple);

inline double feature_sqdist(const HyperedgeFeature& e, const HyperedgeFeature& f) {
  const double a = e[0] - f[0];
  const double b = e[1] - f[1];
  const double c = e[2] - f[2];
  return a * a + b * b + c * c;
}

inline double hyper_compat(const HyperedgeFeature& e, const HyperedgeFeature& f, double gamma3) {
  return std::exp(-gamma3 * feature_sqdist(e, f));
}

/// Resolves gamma3: the configured value, or the seeded auto calibration.
double resolve_gamma3(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg, std::uint64_t seed);

/// Point coordinates plus the full distance table, for fast repeated
/// triangle features over one point set.
class TriangleTable {
 public:
  explicit TriangleTable(const PointSet& ps);

  std::size_t size() const { return n_; }
  double dist(std::size_t a, std::size_t b) const { return d_[a * n_ + b]; }

  HyperedgeFeature operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return triangle_sines(twice_area(pts_, a, b, c), dist(a, b), dist(a, c), dist(b, c));
  }

 private:
  std::size_t n_;
  std::vector<Point> pts_;
  std::vector<double> d_;
};

}  // namespace cursor
