#include "cursor/cur2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "binary_io.hpp"
#include "cursor/error.hpp"
#include "cursor/rng.hpp"

namespace cursor {

CurSample sample_cur(std::size_t n1, std::size_t n2, std::size_t c, std::uint64_t seed) {
  const std::size_t n = n1 * n2;
  if (c < 1 || c > n) {
    throw ConfigError("c must lie in [1, n1*n2 = " + std::to_string(n) + "], got " + std::to_string(c));
  }
  CurSample s;
  s.n1 = n1;
  s.n2 = n2;

  // Partial Fisher-Yates: the first c slots are a uniform sample without
  // replacement.
  Rng col_rng(derive_seed(seed, "cur-columns"));
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0U);
  for (std::size_t a = 0; a < c; ++a) {
    const auto j = a + static_cast<std::size_t>(col_rng.uniform_index(n - a));
    std::swap(all[a], all[j]);
  }
  s.columns.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(c));
  std::sort(s.columns.begin(), s.columns.end());

  s.omega.reserve(4 * c * c);
  for (const auto p : s.columns) {
    for (const auto q : s.columns) s.omega.emplace_back(p, q);
  }
  Rng entry_rng(derive_seed(seed, "cur-entries"));
  for (std::size_t e = 0; e < 3 * c * c; ++e) {
    const auto p = static_cast<std::uint32_t>(entry_rng.uniform_index(n));
    const auto q = static_cast<std::uint32_t>(entry_rng.uniform_index(n));
    s.omega.emplace_back(p, q);
  }
  std::sort(s.omega.begin(), s.omega.end());
  s.omega.erase(std::unique(s.omega.begin(), s.omega.end()), s.omega.end());
  return s;
}

Eigen::MatrixXd build_columns(const CompatMatrix& h, const CurSample& sample) {
  const std::size_t n = h.dim();
  Eigen::MatrixXd C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sample.columns.size()));
  for (std::size_t a = 0; a < sample.columns.size(); ++a) {
    const std::size_t q = sample.columns[a];
    double* col = C.col(static_cast<Eigen::Index>(a)).data();
    for (std::size_t p = 0; p < n; ++p) col[p] = h(p, q);
  }
  return C;
}

Eigen::MatrixXd build_columns(const PointSet& p1, const PointSet& p2, const CurSample& sample,
                              const FeatureConfig& cfg) {
  return build_columns(CompatMatrix(p1, p2, cfg), sample);
}

std::vector<double> omega_values(const CompatMatrix& h, const CurSample& sample) {
  std::vector<double> v;
  v.reserve(sample.omega.size());
  for (const auto& [p, q] : sample.omega) v.push_back(h(p, q));
  return v;
}

namespace {

using Mat = Eigen::MatrixXd;
using Idx = Eigen::Index;

// Omega re-expressed over the compact set of C rows it touches.
struct CompactOmega {
  Mat R;  // m x c
  std::vector<std::pair<Idx, Idx>> pairs;
};

CompactOmega compact(const Mat& C, std::span<const std::pair<std::uint32_t, std::uint32_t>> omega) {
  std::vector<std::uint32_t> rows;
  rows.reserve(2 * omega.size());
  for (const auto& [p, q] : omega) {
    rows.push_back(p);
    rows.push_back(q);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::unordered_map<std::uint32_t, Idx> pos;
  pos.reserve(rows.size());
  CompactOmega out;
  out.R.resize(static_cast<Idx>(rows.size()), C.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= static_cast<std::uint64_t>(C.rows())) throw PreconditionError("Omega entry outside C");
    pos.emplace(rows[r], static_cast<Idx>(r));
    out.R.row(static_cast<Idx>(r)) = C.row(rows[r]);
  }
  out.pairs.reserve(omega.size());
  for (const auto& [p, q] : omega) out.pairs.emplace_back(pos.at(p), pos.at(q));
  return out;
}

// sum_e w_e R_p(e)^T R_q(e), computed as R^T Z with Z_p = sum_e w_e R_q(e).
Mat weighted_gram(const CompactOmega& om, std::span<const double> w) {
  Mat Z = Mat::Zero(om.R.rows(), om.R.cols());
  for (std::size_t e = 0; e < om.pairs.size(); ++e) {
    const auto [p, q] = om.pairs[e];
    Z.row(p) += w[e] * om.R.row(q);
  }
  return om.R.transpose() * Z;
}

// Unregularized normal operator applied to U.
Mat normal_op(const CompactOmega& om, const Mat& U, std::vector<double>& scratch) {
  const Mat Y = om.R * U;
  scratch.resize(om.pairs.size());
  for (std::size_t e = 0; e < om.pairs.size(); ++e) {
    const auto [p, q] = om.pairs[e];
    scratch[e] = Y.row(p).dot(om.R.row(q));
  }
  return weighted_gram(om, scratch);
}

constexpr int kRefineSteps = 2;

Mat fit_direct(const CompactOmega& om, std::span<const double> values, double lambda) {
  const Idx c = om.R.cols();
  const Idx ne = static_cast<Idx>(om.pairs.size());
  Mat D = Mat::Zero(ne + c * c, c * c);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ne + c * c);
  for (Idx e = 0; e < ne; ++e) {
    const auto [p, q] = om.pairs[static_cast<std::size_t>(e)];
    for (Idx b = 0; b < c; ++b) {
      for (Idx a = 0; a < c; ++a) D(e, a + c * b) = om.R(p, a) * om.R(q, b);
    }
    rhs(e) = values[static_cast<std::size_t>(e)];
  }
  const double sl = std::sqrt(lambda);
  for (Idx k = 0; k < c * c; ++k) D(ne + k, k) = sl;
  const Eigen::CompleteOrthogonalDecomposition<Mat> cod(D);
  Eigen::VectorXd u = cod.solve(rhs);
  // Iterated Tikhonov: refit the data residual to strip the ridge bias.
  for (int step = 0; step < kRefineSteps; ++step) {
    rhs.head(ne) -= D.topRows(ne) * u;
    u += cod.solve(rhs);
    rhs.head(ne) = Eigen::Map<const Eigen::VectorXd>(values.data(), ne);
  }
  return Eigen::Map<const Mat>(u.data(), c, c);
}

Mat fit_pcg(const CompactOmega& om, std::span<const double> values, double lambda, FitReport& rep) {
  const Idx c = om.R.cols();
  const Idx m = om.R.rows();
  const double s = static_cast<double>(om.pairs.size());

  // Preconditioner: N is approximated by s * G U G + lambda U with G the mean
  // row Gram matrix; exact when Omega covers all row pairs.
  const Mat G = (om.R.transpose() * om.R) / static_cast<double>(m);
  const Eigen::SelfAdjointEigenSolver<Mat> eig(G);
  const Mat& V = eig.eigenvectors();
  const Eigen::VectorXd g = eig.eigenvalues().cwiseMax(0.0);
  Mat denom(c, c);
  for (Idx a = 0; a < c; ++a) {
    for (Idx b = 0; b < c; ++b) denom(a, b) = s * g(a) * g(b) + lambda;
  }
  auto precond = [&](const Mat& Rm) -> Mat {
    Mat T = V.transpose() * Rm * V;
    T.array() /= denom.array();
    return V * T * V.transpose();
  };

  std::vector<double> scratch;
  const Mat B = weighted_gram(om, values);
  const double bnorm = B.norm();
  Mat U = Mat::Zero(c, c);
  if (bnorm == 0.0) return U;

  constexpr int kMaxIter = 500;
  constexpr double kRelTol = 1e-10;
  Mat Rm = B;
  Mat Zm = precond(Rm);
  Mat P = Zm;
  double rz = (Rm.array() * Zm.array()).sum();
  int it = 0;
  double rel = 1.0;
  for (; it < kMaxIter; ++it) {
    const Mat NP = normal_op(om, P, scratch) + lambda * P;
    const double pnp = (P.array() * NP.array()).sum();
    if (!(pnp > 0.0)) break;
    const double step = rz / pnp;
    U += step * P;
    Rm -= step * NP;
    rel = Rm.norm() / bnorm;
    if (rel <= kRelTol) {
      ++it;
      break;
    }
    Zm = precond(Rm);
    const double rz_next = (Rm.array() * Zm.array()).sum();
    P = Zm + (rz_next / rz) * P;
    rz = rz_next;
  }
  rep.iterations = it;
  rep.relative_residual = rel;
  return U;
}

}  // namespace

Eigen::MatrixXd fit_U(const Eigen::MatrixXd& C, std::span<const std::pair<std::uint32_t, std::uint32_t>> omega,
                      std::span<const double> values, FitReport* report) {
  if (omega.size() != values.size()) throw PreconditionError("Omega and value counts differ");
  const Idx c = C.cols();
  FitReport rep;
  if (omega.empty() || c == 0) {
    if (report) *report = rep;
    return Mat::Zero(c, c);
  }
  const CompactOmega om = compact(C, omega);

  // trace(N) = sum_e |R_p|^2 |R_q|^2.
  const Eigen::VectorXd sq = om.R.rowwise().squaredNorm();
  double trace = 0.0;
  for (const auto& [p, q] : om.pairs) trace += sq(p) * sq(q);
  rep.lambda = 1e-8 * trace / static_cast<double>(c * c);
  if (!(rep.lambda > 0.0)) rep.lambda = 1e-300;

  Mat U;
  if (c <= 20) {
    rep.direct = true;
    U = fit_direct(om, values, rep.lambda);
    std::vector<double> scratch;
    const Mat B = weighted_gram(om, values);
    const double bnorm = B.norm();
    rep.relative_residual = bnorm > 0.0 ? (normal_op(om, U, scratch) - B).norm() / bnorm : 0.0;
  } else {
    U = fit_pcg(om, values, rep.lambda, rep);
  }
  if (report) *report = rep;
  return 0.5 * (U + U.transpose());
}

CurFactors build_cur(const PointSet& p1, const PointSet& p2, std::size_t c, std::uint64_t seed,
                     const FeatureConfig& cfg, FitReport* report) {
  const CompatMatrix h(p1, p2, cfg);
  const CurSample sample = sample_cur(p1.size(), p2.size(), c, seed);
  CurFactors f;
  f.n1 = p1.size();
  f.n2 = p2.size();
  f.C = build_columns(h, sample);
  const std::vector<double> vals = omega_values(h, sample);
  f.U = fit_U(f.C, sample.omega, vals, report);
  f.columns = sample.columns;
  return f;
}

Eigen::VectorXd apply_H(const CurFactors& f, std::span<const double> x) {
  if (x.size() != f.dim()) {
    throw PreconditionError("apply_H: vector length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(f.dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Idx>(x.size()));
  const Eigen::VectorXd t = f.C.transpose() * xv;
  return f.C * (f.U * t);
}

SolveReport prl2_match(const CurFactors& f, std::span<const double> m, const SolverConfig& cfg,
                       const IterateObserver& observer) {
  const auto support = [&f](std::span<const double> x, std::span<double> out) {
    const Eigen::VectorXd y = apply_H(f, x);
    std::copy(y.data(), y.data() + y.size(), out.begin());
  };
  return relaxation_labeling(f.n1, f.n2, m, cfg, support, observer);
}

CandidateSet top_k(const SoftAssignment& x, std::size_t k) {
  if (k < 1 || k > x.n2) throw ConfigError("k must lie in [1, n2 = " + std::to_string(x.n2) + "]");
  CandidateSet out;
  out.n1 = x.n1;
  out.k = k;
  out.flat.resize(x.n1 * k);
  std::vector<std::uint32_t> idx(x.n2);
  for (std::size_t i = 0; i < x.n1; ++i) {
    const auto row = x.row(i);
    std::iota(idx.begin(), idx.end(), 0U);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&row](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    std::copy_n(idx.begin(), k, out.flat.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return out;
}

double hit_rate(const CandidateSet& cands, const GroundTruth& truth) {
  if (truth.mapping.size() != cands.n1) throw PreconditionError("hit_rate: truth and candidates differ in size");
  if (cands.n1 == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cands.n1; ++i) {
    const auto row = cands.row(i);
    if (std::find(row.begin(), row.end(), truth.mapping[i]) != row.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cands.n1);
}

void save_factors(const CurFactors& f, const std::filesystem::path& path) {
  nlohmann::json header = {{"n1", f.n1}, {"n2", f.n2}, {"c", f.rank()}, {"columns", f.columns}, {"version", 1}};
  detail::BinaryWriter w(path);
  w.header(header.dump());
  for (Idx r = 0; r < f.C.rows(); ++r) {
    for (Idx a = 0; a < f.C.cols(); ++a) w.f64(f.C(r, a));
  }
  for (Idx r = 0; r < f.U.rows(); ++r) {
    for (Idx a = 0; a < f.U.cols(); ++a) w.f64(f.U(r, a));
  }
  w.close();
}

CurFactors load_factors(const std::filesystem::path& path) {
  detail::BinaryReader rd(path);
  CurFactors f;
  try {
    const auto header = nlohmann::json::parse(rd.header());
    if (header.at("version").get<int>() != 1) throw ParseError("unsupported factor bundle version");
    f.n1 = header.at("n1").get<std::size_t>();
    f.n2 = header.at("n2").get<std::size_t>();
    f.columns = header.at("columns").get<std::vector<std::uint32_t>>();
    if (header.at("c").get<std::size_t>() != f.columns.size()) throw ParseError("column count mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid factor header: ") + e.what());
  }
  const auto n = static_cast<Idx>(f.n1 * f.n2);
  const auto c = static_cast<Idx>(f.columns.size());
  f.C.resize(n, c);
  f.U.resize(c, c);
  for (Idx r = 0; r < n; ++r) {
    for (Idx a = 0; a < c; ++a) f.C(r, a) = rd.f64();
  }
  for (Idx r = 0; r < c; ++r) {
    for (Idx a = 0; a < c; ++a) f.U(r, a) = rd.f64();
  }
  rd.expect_end();
  return f;
}

}  // namespace cursor
