#include "cursor/features.hpp"

#include <algorithm>
#include <string>

#include "cursor/error.hpp"
#include "cursor/rng.hpp"

namespace cursor {

namespace {

std::vector<double> distance_table(const PointSet& ps) {
  const std::size_t n = ps.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = distance(ps[a], ps[b]);
      d[a * n + b] = v;
      d[b * n + a] = v;
    }
  }
  return d;
}

double mean_edge_length(const std::vector<double>& d, std::size_t n) {
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) sum += d[a * n + b];
  }
  return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

void check_gamma(const std::optional<double>& g, const char* name) {
  if (g && (!std::isfinite(*g) || *g < 0.0)) {
    throw ConfigError(std::string(name) + " must be finite and >= 0");
  }
}

}  // namespace

FirstOrderCompat first_order(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg) {
  check_gamma(cfg.gamma0, "gamma0");
  FirstOrderCompat out;
  out.n1 = p1.size();
  out.n2 = p2.size();
  out.m.resize(out.n1 * out.n2);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.n1; ++i) {
    for (std::size_t j = 0; j < out.n2; ++j) {
      const double d = distance(p1[i], p2[j]);
      out.m[i * out.n2 + j] = d;
      sum += d;
    }
  }
  if (cfg.gamma0) {
    out.gamma0 = *cfg.gamma0;
  } else {
    const double mean = sum / static_cast<double>(out.m.size());
    out.gamma0 = mean > 0.0 ? 1.0 / mean : 1.0;
  }
  for (auto& v : out.m) v = std::exp(-out.gamma0 * v);
  return out;
}

EdgeKernel::EdgeKernel(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg)
    : n1_(p1.size()), n2_(p2.size()), d1_(distance_table(p1)), d2_(distance_table(p2)) {
  check_gamma(cfg.gamma2, "gamma2");
  gamma2_ = cfg.gamma2.value_or(1.0);
  sigma_d_ = 0.5 * (mean_edge_length(d1_, n1_) + mean_edge_length(d2_, n2_));
  if (!(sigma_d_ > 0.0)) sigma_d_ = 1.0;
  scale_ = gamma2_ / sigma_d_;
  beta_ = cfg.edge_orientation;
  if (!(beta_ >= 0.0 && beta_ <= 1.0)) throw ConfigError("edge_orientation must lie in [0, 1]");
  if (beta_ > 0.0) {
    for (const auto& p : p1.points()) {
      x1_.push_back(p.x);
      y1_.push_back(p.y);
    }
    for (const auto& p : p2.points()) {
      x2_.push_back(p.x);
      y2_.push_back(p.y);
    }
  }
}

double edge_compat(const PointSet& p1, const PointSet& p2, std::array<std::size_t, 2> src,
                   std::array<std::size_t, 2> tgt, const FeatureConfig& cfg) {
  if (src[0] == src[1] || tgt[0] == tgt[1]) throw PreconditionError("edge endpoints must differ");
  if (src[0] >= p1.size() || src[1] >= p1.size() || tgt[0] >= p2.size() || tgt[1] >= p2.size()) {
    throw PreconditionError("edge index out of range");
  }
  return EdgeKernel(p1, p2, cfg)(src[0], src[1], tgt[0], tgt[1]);
}

HyperedgeFeature hyperedge_feature(const PointSet& ps, std::array<std::size_t, 3> t) {
  if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) throw PreconditionError("hyperedge indices must be distinct");
  if (std::max({t[0], t[1], t[2]}) >= ps.size()) throw PreconditionError("hyperedge index out of range");
  const Point& a = ps[t[0]];
  const Point& b = ps[t[1]];
  const Point& c = ps[t[2]];
  return triangle_sines(twice_area(ps.points(), t[0], t[1], t[2]), distance(a, b), distance(a, c), distance(b, c));
}

double resolve_gamma3(const PointSet& p1, const PointSet& p2, const FeatureConfig& cfg, std::uint64_t seed) {
  check_gamma(cfg.gamma3, "gamma3");
  if (cfg.gamma3) return *cfg.gamma3;
  constexpr int kPairs = 1000;
  Rng rng(seed);
  auto draw = [&rng](std::size_t n) {
    std::array<std::size_t, 3> t{};
    t[0] = rng.uniform_index(n);
    do t[1] = rng.uniform_index(n); while (t[1] == t[0]);
    do t[2] = rng.uniform_index(n); while (t[2] == t[0] || t[2] == t[1]);
    return t;
  };
  double sum = 0.0;
  for (int s = 0; s < kPairs; ++s) {
    const auto e = hyperedge_feature(p1, draw(p1.size()));
    const auto f = hyperedge_feature(p2, draw(p2.size()));
    sum += feature_sqdist(e, f);
  }
  const double mean = sum / kPairs;
  return mean > 0.0 ? 1.0 / mean : 1.0;
}

TriangleTable::TriangleTable(const PointSet& ps)
    : n_(ps.size()), pts_(ps.points().begin(), ps.points().end()), d_(distance_table(ps)) {}

}  // namespace cursor
