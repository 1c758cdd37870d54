#include "cursor/tensor3.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "binary_io.hpp"
#include "cursor/error.hpp"
#include "cursor/rng.hpp"

namespace cursor {

SparseTensor3::SparseTensor3(std::size_t n1, std::size_t n2, std::vector<TensorEntry> raw) : n1_(n1), n2_(n2) {
  const std::size_t n = n1 * n2;
  std::size_t kept = 0;
  for (auto e : raw) {
    if (std::isnan(e.v) || e.v > 1.0) throw PreconditionError("tensor values must lie in (0, 1]");
    if (e.a >= n || e.b >= n || e.c >= n) throw PreconditionError("tensor index out of range");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.b > e.c) std::swap(e.b, e.c);
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.a == e.b || e.b == e.c || !(e.v > 0.0)) continue;
    raw[kept++] = e;
  }
  raw.resize(kept);
  std::sort(raw.begin(), raw.end(), [](const TensorEntry& l, const TensorEntry& r) {
    if (l.a != r.a) return l.a < r.a;
    if (l.b != r.b) return l.b < r.b;
    if (l.c != r.c) return l.c < r.c;
    return l.v > r.v;
  });
  // Equal triples are adjacent with the largest value first.
  entries_.reserve(raw.size());
  for (const auto& e : raw) {
    if (!entries_.empty()) {
      const auto& last = entries_.back();
      if (last.a == e.a && last.b == e.b && last.c == e.c) continue;
    }
    entries_.push_back(e);
  }
}

void TensorGenConfig::validate() const {
  if (t < 1) throw ConfigError("t must be at least 1");
  if (r < 1) throw ConfigError("r must be at least 1");
  if (r1 < 1) throw ConfigError("r1 must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

namespace {

std::uint64_t choose3(std::uint64_t n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }

Triple random_triple(Rng& rng, std::size_t n) {
  const auto a = static_cast<std::uint32_t>(rng.uniform_index(n));
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  do b = static_cast<std::uint32_t>(rng.uniform_index(n)); while (b == a);
  do c = static_cast<std::uint32_t>(rng.uniform_index(n)); while (c == a || c == b);
  Triple t{a, b, c};
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

std::vector<Triple> sample_hyperedges(std::size_t n1, std::size_t t, std::uint64_t seed) {
  if (n1 < 3) throw PreconditionError("hyperedge sampling needs at least 3 source nodes");
  Rng rng(seed);
  const std::uint64_t total = choose3(n1);
  std::vector<Triple> out;
  out.reserve(std::min<std::uint64_t>(t, total));
  const auto key = [n1](const Triple& tr) { return (tr[0] * std::uint64_t{n1} + tr[1]) * n1 + tr[2]; };

  if (t > total || 2 * static_cast<std::uint64_t>(t) <= total) {
    // Rejection keeps draws distinct; past C(n1,3) every draw is kept and
    // duplicates are dropped, so fewer than t triples come back.
    const bool distinct = t <= total;
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2 * t);
    std::size_t draws = 0;
    while (distinct ? out.size() < t : draws < t) {
      const Triple tr = random_triple(rng, n1);
      ++draws;
      if (seen.insert(key(tr)).second) out.push_back(tr);
    }
  } else {
    std::vector<Triple> all;
    all.reserve(total);
    for (std::uint32_t a = 0; a < n1; ++a) {
      for (std::uint32_t b = a + 1; b < n1; ++b) {
        for (std::uint32_t c = b + 1; c < n1; ++c) all.push_back({a, b, c});
      }
    }
    for (std::size_t s = 0; s < t; ++s) {
      const auto j = s + static_cast<std::size_t>(rng.uniform_index(all.size() - s));
      std::swap(all[s], all[j]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Scored {
  double score;  // gamma3 * squared feature distance; lower is better
  Triple tgt;
};

inline bool better(const Scored& l, const Scored& r) {
  if (l.score != r.score) return l.score < r.score;
  return l.tgt < r.tgt;
}

// Bounded selection of the r best candidates; heap top is the worst kept.
class TopR {
 public:
  explicit TopR(std::size_t r) : r_(r) { heap_.reserve(r); }

  void clear() { heap_.clear(); }

  void offer(double score, std::uint32_t j1, std::uint32_t j2, std::uint32_t j3) {
    if (heap_.size() == r_) {
      const Scored& worst = heap_.front();
      if (score > worst.score) return;
      const Scored cand{score, {j1, j2, j3}};
      if (!better(cand, worst)) return;
      std::pop_heap(heap_.begin(), heap_.end(), better);
      heap_.back() = cand;
      std::push_heap(heap_.begin(), heap_.end(), better);
      return;
    }
    heap_.push_back({score, {j1, j2, j3}});
    std::push_heap(heap_.begin(), heap_.end(), better);
  }

  const std::vector<Scored>& kept() const { return heap_; }

 private:
  std::size_t r_;
  std::vector<Scored> heap_;
};

void emit(const TopR& sel, const Triple& src, std::size_t n2, std::vector<TensorEntry>& out) {
  for (const auto& s : sel.kept()) {
    const double v = std::exp(-s.score);
    if (!(v > 0.0)) continue;
    out.push_back({static_cast<std::uint32_t>(src[0] * n2 + s.tgt[0]),
                   static_cast<std::uint32_t>(src[1] * n2 + s.tgt[1]),
                   static_cast<std::uint32_t>(src[2] * n2 + s.tgt[2]), v});
  }
}

// Runs work(begin, end, out) over contiguous chunks of [0, count) and
// concatenates the per-chunk outputs in chunk order.
template <typename Work>
std::vector<TensorEntry> run_chunked(std::size_t count, unsigned threads, Work work) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::vector<TensorEntry>> parts(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  if (threads == 1) {
    work(std::size_t{0}, count, parts[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = std::min(count, w * chunk);
      const std::size_t e = std::min(count, b + chunk);
      pool.emplace_back([&, b, e, w] { work(b, e, parts[w]); });
    }
  }
  std::vector<TensorEntry> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

void check_triples(std::span<const Triple> triples, std::size_t n1) {
  for (const auto& t : triples) {
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2] || std::max({t[0], t[1], t[2]}) >= n1) {
      throw PreconditionError("invalid source hyperedge");
    }
  }
}

// Sines of every target triangle through an ordered pair (u, w), as three
// rows over the free vertex v: sine at v, at u and at w. Rows of all pairs
// are precomputed when they fit the memory cap, otherwise filled on demand.
class PairSines {
 public:
  static constexpr std::size_t kCacheBytes = std::size_t{512} << 20;

  explicit PairSines(const PointSet& ps) : table_(ps), n_(ps.size()) {
    if (3 * n_ * n_ * n_ * sizeof(double) > kCacheBytes) return;
    cache_.resize(3 * n_ * n_ * n_);
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t w = 0; w < n_; ++w) {
        if (u != w) fill(u, w, cache_.data() + 3 * n_ * (u * n_ + w));
      }
    }
  }

  std::size_t size() const { return n_; }

  // Pointer to the 3 * n row block of (u, w); scratch must hold 3 * n.
  const double* rows(std::size_t u, std::size_t w, double* scratch) const {
    if (!cache_.empty()) return cache_.data() + 3 * n_ * (u * n_ + w);
    fill(u, w, scratch);
    return scratch;
  }

 private:
  void fill(std::size_t u, std::size_t w, double* out) const {
    for (std::size_t v = 0; v < n_; ++v) {
      if (v == u || v == w) {
        out[v] = out[n_ + v] = out[2 * n_ + v] = 0.0;
        continue;
      }
      const HyperedgeFeature f = table_(v, u, w);
      out[v] = f[0];
      out[n_ + v] = f[1];
      out[2 * n_ + v] = f[2];
    }
  }

  TriangleTable table_;
  std::size_t n_;
  std::vector<double> cache_;
};

// Offers every free vertex v of one fiber. pos says where v sits in the
// target triple (0, 1 or 2); u and w fill the other two slots in order.
// skip marks vertices already covered by an earlier fiber family.
void scan_fiber(const HyperedgeFeature& e, double gamma3, const double* rows, std::size_t n, int pos,
                std::uint32_t u, std::uint32_t w, const char* skip, TopR& sel) {
  const double* sv = rows;
  const double* su = rows + n;
  const double* sw = rows + 2 * n;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (v == u || v == w || (skip && skip[v])) continue;
    HyperedgeFeature f;
    Triple tgt;
    switch (pos) {
      case 0:
        f = {sv[v], su[v], sw[v]};
        tgt = {v, u, w};
        break;
      case 1:
        f = {su[v], sv[v], sw[v]};
        tgt = {u, v, w};
        break;
      default:
        f = {su[v], sw[v], sv[v]};
        tgt = {u, w, v};
        break;
    }
    sel.offer(gamma3 * feature_sqdist(e, f), tgt[0], tgt[1], tgt[2]);
  }
}

}  // namespace

SparseTensor3 generate_fiber_cur(const PointSet& p1, const PointSet& p2, const CandidateSet& cands,
                                 std::span<const Triple> source_triples, std::size_t r, double gamma3,
                                 unsigned threads) {
  if (r < 1) throw ConfigError("r must be at least 1");
  if (cands.n1 != p1.size()) throw PreconditionError("candidate set does not match the source graph");
  check_triples(source_triples, p1.size());
  const std::size_t n2 = p2.size();
  for (const auto j : cands.flat) {
    if (j >= n2) throw PreconditionError("candidate index out of range");
  }
  const TriangleTable src(p1);
  const PairSines tgt(p2);

  auto work = [&](std::size_t begin, std::size_t end, std::vector<TensorEntry>& out) {
    TopR sel(r);
    std::vector<double> scratch(3 * n2);
    // in_list[m][j]: target j is a candidate of the m-th source vertex.
    std::vector<std::vector<char>> in_list(3, std::vector<char>(n2, 0));
    for (std::size_t s = begin; s < end; ++s) {
      const Triple& st = source_triples[s];
      const HyperedgeFeature e = src(st[0], st[1], st[2]);
      std::array<std::span<const std::uint32_t>, 3> L;
      for (int m = 0; m < 3; ++m) {
        L[m] = cands.row(st[m]);
        for (const auto j : L[m]) in_list[m][j] = 1;
      }
      sel.clear();
      // (:, j2, j3): every free first node.
      for (const auto j2 : L[1]) {
        for (const auto j3 : L[2]) {
          if (j2 != j3) scan_fiber(e, gamma3, tgt.rows(j2, j3, scratch.data()), n2, 0, j2, j3, nullptr, sel);
        }
      }
      // (j1, :, j3): j2 in L2 was covered by the first family.
      for (const auto j1 : L[0]) {
        for (const auto j3 : L[2]) {
          if (j1 != j3) scan_fiber(e, gamma3, tgt.rows(j1, j3, scratch.data()), n2, 1, j1, j3, in_list[1].data(), sel);
        }
      }
      // (j1, j2, :): j3 in L3 was covered by both earlier families.
      for (const auto j1 : L[0]) {
        for (const auto j2 : L[1]) {
          if (j1 != j2) scan_fiber(e, gamma3, tgt.rows(j1, j2, scratch.data()), n2, 2, j1, j2, in_list[2].data(), sel);
        }
      }
      for (int m = 0; m < 3; ++m) {
        for (const auto j : L[m]) in_list[m][j] = 0;
      }
      emit(sel, st, n2, out);
    }
  };
  return SparseTensor3(p1.size(), n2, run_chunked(source_triples.size(), threads, work));
}

SparseTensor3 generate_exhaustive(const PointSet& p1, const PointSet& p2, std::span<const Triple> source_triples,
                                  std::size_t r1, double gamma3, double budget, unsigned threads) {
  if (r1 < 1) throw ConfigError("r1 must be at least 1");
  check_triples(source_triples, p1.size());
  const std::size_t n2 = p2.size();
  const double work_estimate =
      static_cast<double>(n2) * static_cast<double>(n2) * static_cast<double>(n2) *
      static_cast<double>(source_triples.size());
  if (work_estimate > budget) {
    throw ResourceError("exhaustive tensor generation needs n2^3 * t = " + std::to_string(work_estimate) +
                        " evaluations, budget is " + std::to_string(budget));
  }
  const TriangleTable src(p1);
  const PairSines tgt(p2);
  auto work = [&](std::size_t begin, std::size_t end, std::vector<TensorEntry>& out) {
    TopR sel(r1);
    std::vector<double> scratch(3 * n2);
    for (std::size_t s = begin; s < end; ++s) {
      const Triple& st = source_triples[s];
      const HyperedgeFeature e = src(st[0], st[1], st[2]);
      sel.clear();
      for (std::uint32_t j1 = 0; j1 < n2; ++j1) {
        for (std::uint32_t j2 = 0; j2 < n2; ++j2) {
          if (j1 != j2) scan_fiber(e, gamma3, tgt.rows(j1, j2, scratch.data()), n2, 2, j1, j2, nullptr, sel);
        }
      }
      emit(sel, st, n2, out);
    }
  };
  return SparseTensor3(p1.size(), n2, run_chunked(source_triples.size(), threads, work));
}

void mode_product_xx(const SparseTensor3& t, std::span<const double> x, std::span<double> out) {
  if (x.size() != t.dim() || out.size() != t.dim()) {
    throw PreconditionError("mode product: vector length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(t.dim()));
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& e : t.entries()) {
    const double w = 2.0 * e.v;
    out[e.c] += w * x[e.a] * x[e.b];
    out[e.b] += w * x[e.a] * x[e.c];
    out[e.a] += w * x[e.b] * x[e.c];
  }
}

std::vector<double> mode_product_xx(const SparseTensor3& t, std::span<const double> x, unsigned threads) {
  std::vector<double> out(t.dim(), 0.0);
  if (threads <= 1 || t.nnz() < 2 * static_cast<std::size_t>(threads)) {
    mode_product_xx(t, x, out);
    return out;
  }
  if (x.size() != t.dim()) throw PreconditionError("mode product: vector length mismatch");
  const auto entries = t.entries();
  const std::size_t chunk = (entries.size() + threads - 1) / threads;
  std::vector<std::vector<double>> partial(threads, std::vector<double>(t.dim(), 0.0));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        auto& acc = partial[w];
        const std::size_t b = std::min(entries.size(), w * chunk);
        const std::size_t e = std::min(entries.size(), b + chunk);
        for (std::size_t k = b; k < e; ++k) {
          const auto& en = entries[k];
          const double wv = 2.0 * en.v;
          acc[en.c] += wv * x[en.a] * x[en.b];
          acc[en.b] += wv * x[en.a] * x[en.c];
          acc[en.a] += wv * x[en.b] * x[en.c];
        }
      });
    }
  }
  for (const auto& p : partial) {
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += p[q];
  }
  return out;
}

TensorStats stats(const SparseTensor3& t) { return {t.nnz(), t.nnz() * (3 * kIndexBytes + kValueBytes)}; }

void save_tensor(const SparseTensor3& t, const std::filesystem::path& path) {
  const nlohmann::json header = {{"n1", t.n1()}, {"n2", t.n2()}, {"nnz", t.nnz()}, {"version", 1}};
  detail::BinaryWriter w(path);
  w.header(header.dump());
  for (const auto& e : t.entries()) {
    w.u32(e.a);
    w.u32(e.b);
    w.u32(e.c);
    w.f64(e.v);
  }
  w.close();
}

SparseTensor3 load_tensor(const std::filesystem::path& path) {
  detail::BinaryReader rd(path);
  std::size_t n1 = 0, n2 = 0, nnz = 0;
  try {
    const auto header = nlohmann::json::parse(rd.header());
    if (header.at("version").get<int>() != 1) throw ParseError("unsupported tensor file version");
    n1 = header.at("n1").get<std::size_t>();
    n2 = header.at("n2").get<std::size_t>();
    nnz = header.at("nnz").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid tensor header: ") + e.what());
  }
  std::vector<TensorEntry> raw(nnz);
  for (auto& e : raw) {
    e.a = rd.u32();
    e.b = rd.u32();
    e.c = rd.u32();
    e.v = rd.f64();
  }
  rd.expect_end();
  try {
    return SparseTensor3(n1, n2, std::move(raw));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace cursor
