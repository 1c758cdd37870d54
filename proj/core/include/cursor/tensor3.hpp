#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cursor/cur2.hpp"
#include "cursor/features.hpp"
#include "cursor/problems.hpp"

namespace cursor {

/// One stored value of the supersymmetric tensor. Canonical entries satisfy
/// a < b < c; the five other permutations share the value implicitly.
struct TensorEntry {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  double v = 0.0;

  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

/// Sparse supersymmetric third-order compatibility tensor over flattened
/// assignment indices (dimension n1*n2 per mode).
class SparseTensor3 {
 public:
  SparseTensor3() = default;

  /// Canonicalizes raw entries: sorts each index triple, drops triples with a
  /// repeated index and non-positive values, and keeps the maximum value when
  /// a canonical triple occurs more than once. Throws PreconditionError for
  /// indices outside n1*n2 or values above 1.
  SparseTensor3(std::size_t n1, std::size_t n2, std::vector<TensorEntry> raw);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t dim() const { return n1_ * n2_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const TensorEntry> entries() const { return entries_; }

 private:
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<TensorEntry> entries_;
};

using Triple = std::array<std::uint32_t, 3>;

struct TensorGenConfig {
  std::size_t t = 900;   // sampled source hyperedges
  std::size_t r = 5;     // kept per source hyperedge, fiber generation
  std::size_t r1 = 900;  // kept per source hyperedge, exhaustive baseline
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Exhaustive generation refuses when n2^3 * t exceeds this.
  double budget = 1e9;

  void validate() const;
};

/// t distinct source triples (i < j < k), uniform without replacement when
/// t <= C(n1, 3); otherwise t draws with replacement, deduplicated.
/// Throws PreconditionError when n1 < 3.
std::vector<Triple> sample_hyperedges(std::size_t n1, std::size_t t, std::uint64_t seed);

/// Fiber-guided generation. For every source triple (i1, i2, i3) the target
/// triples of the three fiber families (:, j2, j3), (j1, :, j3), (j1, j2, :)
/// with j_m drawn from the candidate lists are scored (union, no repeats,
/// no repeated target node). The r best are stored at
/// ((i1, j1), (i2, j2), (i3, j3)). Ranking is by compatibility, ties by
/// lexicographic target triple.
SparseTensor3 generate_fiber_cur(const PointSet& p1, const PointSet& p2, const CandidateSet& cands,
                                 std::span<const Triple> source_triples, std::size_t r, double gamma3,
                                 unsigned threads = 1);

/// Exhaustive baseline: scores every ordered target triple with distinct
/// nodes and keeps the r1 best per source triple. Throws ResourceError when
/// n2^3 * t exceeds the budget, before doing any work.
SparseTensor3 generate_exhaustive(const PointSet& p1, const PointSet& p2, std::span<const Triple> source_triples,
                                  std::size_t r1, double gamma3, double budget, unsigned threads = 1);

/// delta_j = sum_{p,q} H_{p,q,j} x_p x_q over the supersymmetric expansion,
/// one pass over the canonical entries. With threads > 1 the entries are
/// sharded and the partial sums reduced in shard order.
std::vector<double> mode_product_xx(const SparseTensor3& t, std::span<const double> x, unsigned threads = 1);
void mode_product_xx(const SparseTensor3& t, std::span<const double> x, std::span<double> out);

struct TensorStats {
  std::size_t nnz = 0;
  std::size_t memory_bytes = 0;
};

inline constexpr std::size_t kIndexBytes = 4;
inline constexpr std::size_t kValueBytes = 8;

/// memory_bytes = nnz * (3 * 4 + 8).
TensorStats stats(const SparseTensor3& t);

// Binary tensor file: one JSON header line {"n1","n2","nnz","version"} then
// nnz little-endian records (u32 a, u32 b, u32 c, f64 v).
void save_tensor(const SparseTensor3& t, const std::filesystem::path& path);
SparseTensor3 load_tensor(const std::filesystem::path& path);

}  // namespace cursor
