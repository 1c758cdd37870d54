#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cursor {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Ordered 2-D point set with at least three finite points.
class PointSet {
 public:
  /// Throws PreconditionError when fewer than three points are given or a
  /// coordinate is not finite.
  explicit PointSet(std::vector<Point> points);

  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const { return points_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::vector<Point> points_;
};

/// mapping[i] is the target index of the true match of source node i.
struct GroundTruth {
  std::vector<std::uint32_t> mapping;

  /// Throws PreconditionError unless entries are distinct and below n2.
  void validate(std::size_t n2) const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct ProblemConfig {
  std::size_t n1 = 30;
  std::size_t n2 = 30;
  double sigma = 0.02;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless 3 <= n1 <= n2 and sigma >= 0.
  void validate() const;
};

struct Problem {
  PointSet source;
  PointSet target;
  GroundTruth truth;
};

/// Mean and pooled coordinate standard deviation of a point set.
struct CoordStats {
  Point mean;
  double sigma0 = 0.0;
  std::size_t count = 0;
};

CoordStats coord_stats(const PointSet& ps);

/// Source points are i.i.d. standard 2-D Gaussian. The target holds noisy
/// copies of every source point at uniformly shuffled positions plus
/// n2 - n1 outliers drawn from N(mean, sigma0^2) of the source.
Problem gen_synthetic(const ProblemConfig& cfg);

struct Rotate {
  double theta = 0.0;  // radians, counter-clockwise about the origin
};
struct ScaleX {
  double factor = 1.0;
};
struct Noise {
  double sigma_rel = 0.0;  // multiple of the reference sigma0
};
struct Outliers {
  double ratio = 0.0;  // appended count is round(ratio * reference count)
};
using Deformation = std::variant<Rotate, ScaleX, Noise, Outliers>;

/// Applies one deformation. Noise and outlier statistics come from
/// `reference` when given, otherwise from `ps` itself. Outliers are appended
/// after the existing points.
PointSet deform(const PointSet& ps, const Deformation& kind, std::uint64_t seed,
                const CoordStats* reference = nullptr);

/// Deformation protocol for template experiments: rotate, scale x by
/// 1.1^scale_beta, add relative noise, append outliers, then shuffle.
struct DeformSpec {
  double theta = 0.0;
  double scale_beta = 0.0;
  double noise_rel = 0.02;
  double outlier_ratio = 0.0;
};

Problem make_deformed_problem(const PointSet& source, const DeformSpec& spec, std::uint64_t seed);

/// Subtracts the coordinate mean.
PointSet normalize(const PointSet& ps);

// Point-set files: CSV with one "x,y" per line ('#' starts a comment) or JSON
// {"points": [[x, y], ...]}. The format is chosen by extension (.json) or by a
// leading '{'.
enum class PointFormat { csv, json };

PointSet load_pointset(const std::filesystem::path& path);
PointSet parse_pointset(std::string_view text, PointFormat format);
void save_pointset(const PointSet& ps, const std::filesystem::path& path, PointFormat format);
std::string format_pointset(const PointSet& ps, PointFormat format);

// Problem bundles: {"source": ..., "target": ..., "truth": [...], "config": {...}}.
void save_bundle(const Problem& problem, const ProblemConfig& cfg, const std::filesystem::path& path);
Problem load_bundle(const std::filesystem::path& path, ProblemConfig* cfg = nullptr);

}  // namespace cursor
