#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cursor/error.hpp"
#include "cursor/features.hpp"
#include "cursor/problems.hpp"
#include "oracles.hpp"

using namespace cursor;

TEST(FirstOrder, AutoGammaExample) {
  const PointSet p({{0, 0}, {1, 0}, {5, 5}});
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) sum += std::hypot(p[i].x - p[j].x, p[i].y - p[j].y);
  }
  const auto m = first_order(p, p, {});
  EXPECT_DOUBLE_EQ(m.gamma0, 9.0 / sum);
  EXPECT_NEAR(m(0, 1), std::exp(-m.gamma0), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m(i, i), 1.0);
}

TEST(FirstOrder, UnitDistanceWithGammaTwo) {
  FeatureConfig cfg;
  cfg.gamma0 = 2.0;
  const PointSet p({{0, 0}, {1, 0}, {0, 0}});
  const auto m = first_order(p, p, cfg);
  EXPECT_NEAR(m(0, 1), 0.13534, 1e-5);
}

TEST(FirstOrder, IdenticalSetsDiagonalDominant) {
  const auto p = oracle::random_points(12, 4);
  const auto m = first_order(p, p, {});
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_GE(m(i, j), 0.0);
      EXPECT_LE(m(i, j), 1.0);
      if (j != i) EXPECT_LT(m(i, j), m(i, i));
    }
  }
}

TEST(EdgeKernel, LengthKernelExample) {
  FeatureConfig cfg;
  cfg.edge_orientation = 0.0;
  const PointSet p1({{0, 0}, {1, 0}, {0, 3}});
  const PointSet p2({{0, 0}, {2, 0}, {0, 3}});
  EdgeKernel k0(p1, p2, cfg);
  // gamma2 / sigma_d = 1 with d_src = 1, d_tgt = 2.
  cfg.gamma2 = k0.sigma_d();
  EdgeKernel k(p1, p2, cfg);
  EXPECT_NEAR(k(0, 1, 0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k(0, 1, 0, 1), 0.36788, 1e-5);
}

TEST(EdgeKernel, EqualLengthsGiveOne) {
  FeatureConfig cfg;
  cfg.edge_orientation = 0.0;
  const PointSet p1({{0, 0}, {1, 0}, {0, 3}});
  const PointSet p2({{5, 5}, {5, 6}, {1, 1}});
  EXPECT_EQ(edge_compat(p1, p2, {0, 1}, {0, 1}, cfg), 1.0);
}

TEST(EdgeKernel, SwapInvariance) {
  const auto p1 = oracle::random_points(6, 1);
  const auto p2 = oracle::random_points(7, 2);
  for (const double w : {0.0, 0.5, 1.0}) {
    FeatureConfig cfg;
    cfg.edge_orientation = w;
    const EdgeKernel k(p1, p2, cfg);
    EXPECT_EQ(k(1, 4, 2, 6), k(4, 1, 6, 2));
    EXPECT_EQ(k(0, 5, 3, 1), k(5, 0, 1, 3));
  }
}

TEST(EdgeKernel, MatchesDenseOracle) {
  const auto p1 = oracle::random_points(4, 3);
  const auto p2 = oracle::random_points(5, 4);
  for (const double w : {0.0, 0.5, 1.0}) {
    FeatureConfig cfg;
    cfg.edge_orientation = w;
    cfg.gamma2 = 1.3;
    const auto h = oracle::dense_H(p1, p2, 1.3, w);
    const EdgeKernel k(p1, p2, cfg);
    for (std::size_t i1 = 0; i1 < 4; ++i1) {
      for (std::size_t i2 = 0; i2 < 4; ++i2) {
        for (std::size_t j1 = 0; j1 < 5; ++j1) {
          for (std::size_t j2 = 0; j2 < 5; ++j2) {
            if (i1 == i2 || j1 == j2) continue;
            const double v = k(i1, i2, j1, j2);
            EXPECT_NEAR(v, h(static_cast<Eigen::Index>(i1 * 5 + j1), static_cast<Eigen::Index>(i2 * 5 + j2)), 1e-13);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
          }
        }
      }
    }
  }
}

TEST(EdgeKernel, GraphRoleSwap) {
  const auto p1 = oracle::random_points(5, 7);
  const auto p2 = oracle::random_points(6, 8);
  const EdgeKernel a(p1, p2, {});
  const EdgeKernel b(p2, p1, {});
  EXPECT_NEAR(a(0, 3, 2, 5), b(2, 5, 0, 3), 1e-15);
}

TEST(EdgeKernel, PreconditionsAndRange) {
  const auto p = oracle::random_points(4, 1);
  EXPECT_THROW(edge_compat(p, p, {1, 1}, {0, 2}, {}), PreconditionError);
  FeatureConfig bad;
  bad.edge_orientation = 1.5;
  EXPECT_THROW(EdgeKernel(p, p, bad), ConfigError);
}

TEST(Hyperedge, Equilateral) {
  const PointSet p({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}});
  const auto f = hyperedge_feature(p, {0, 1, 2});
  for (const double v : f) EXPECT_NEAR(v, 0.8660, 1e-4);
}

TEST(Hyperedge, RightIsosceles) {
  const PointSet p({{0, 0}, {1, 0}, {0, 1}});
  const auto f = hyperedge_feature(p, {0, 1, 2});
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(f[1], 0.70711, 1e-5);
  EXPECT_NEAR(f[2], 0.70711, 1e-5);
}

TEST(Hyperedge, DegenerateTriangles) {
  const PointSet line({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(hyperedge_feature(line, {0, 1, 2}), (HyperedgeFeature{0, 0, 0}));
  const PointSet coincident({{0, 0}, {0, 0}, {2, 1}});
  EXPECT_EQ(hyperedge_feature(coincident, {0, 1, 2}), (HyperedgeFeature{0, 0, 0}));
  EXPECT_THROW(hyperedge_feature(line, {0, 0, 2}), PreconditionError);
  EXPECT_THROW(hyperedge_feature(line, {0, 1, 3}), PreconditionError);
}

TEST(Hyperedge, MatchesLawOfCosines) {
  const auto p = oracle::random_points(10, 12);
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = 0; b < 10; ++b) {
      for (std::size_t c = 0; c < 10; ++c) {
        if (a == b || a == c || b == c) continue;
        const auto f = hyperedge_feature(p, {a, b, c});
        const auto g = oracle::angle_sines(p[a], p[b], p[c]);
        for (int m = 0; m < 3; ++m) {
          EXPECT_NEAR(f[m], g[m], 1e-7);
          EXPECT_GE(f[m], 0.0);
          EXPECT_LE(f[m], 1.0);
        }
      }
    }
  }
}

TEST(Hyperedge, SimilarityInvariant) {
  const auto p = oracle::random_points(8, 13);
  const double th = 0.7, s = 2.5;
  std::vector<Point> q;
  for (const auto& pt : p.points()) {
    q.push_back({s * (std::cos(th) * pt.x - std::sin(th) * pt.y) + 3.0,
                 s * (std::sin(th) * pt.x + std::cos(th) * pt.y) - 1.0});
  }
  const PointSet pq(q);
  for (std::size_t a = 0; a < 6; ++a) {
    const auto f = hyperedge_feature(p, {a, a + 1, a + 2});
    const auto g = hyperedge_feature(pq, {a, a + 1, a + 2});
    for (int m = 0; m < 3; ++m) EXPECT_NEAR(f[m], g[m], 1e-9);
  }
}

TEST(Hyperedge, PermutationPermutesComponentsExactly) {
  const auto p = oracle::random_points(6, 14);
  const auto f = hyperedge_feature(p, {1, 3, 5});
  const auto g = hyperedge_feature(p, {3, 5, 1});
  const auto h = hyperedge_feature(p, {5, 1, 3});
  EXPECT_EQ(g, (HyperedgeFeature{f[1], f[2], f[0]}));
  EXPECT_EQ(h, (HyperedgeFeature{f[2], f[0], f[1]}));
  const TriangleTable table(p);
  EXPECT_EQ(table(3, 5, 1), g);
}

TEST(HyperCompat, Values) {
  const HyperedgeFeature e{0.5, 0.5, 0.5};
  EXPECT_EQ(hyper_compat(e, e, 3.0), 1.0);
  EXPECT_NEAR(hyper_compat({1, 0, 0}, {0, 0, 0}, 1.0), 0.36788, 1e-5);
  EXPECT_GT(hyper_compat(e, {0.6, 0.5, 0.5}, 1.0), hyper_compat(e, {0.7, 0.5, 0.5}, 1.0));
}

TEST(HyperCompat, AutoGammaSeeded) {
  const auto p1 = oracle::random_points(15, 1);
  const auto p2 = oracle::random_points(15, 2);
  const double a = resolve_gamma3(p1, p2, {}, 5);
  EXPECT_EQ(a, resolve_gamma3(p1, p2, {}, 5));
  EXPECT_GT(a, 0.0);
  FeatureConfig fixed;
  fixed.gamma3 = 4.0;
  EXPECT_EQ(resolve_gamma3(p1, p2, fixed, 5), 4.0);
}
