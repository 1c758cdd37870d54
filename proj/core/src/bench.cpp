#include "cursor/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "cursor/cur2.hpp"
#include "cursor/error.hpp"
#include "cursor/matchers.hpp"
#include "cursor/problems.hpp"
#include "cursor/rng.hpp"
#include "cursor/tensor3.hpp"

namespace cursor {

using nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::synthetic: return "synthetic";
    case ProblemKind::deformed: return "deformed";
    case ProblemKind::bundle: return "bundle";
  }
  return "synthetic";
}

std::string_view to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::cursor: return "cursor";
    case Pipeline::baseline_prl: return "baseline_prl";
    case Pipeline::baseline_power: return "baseline_power";
  }
  return "cursor";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (auto k : {ProblemKind::synthetic, ProblemKind::deformed, ProblemKind::bundle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem kind '" + std::string(name) + "'");
}

Pipeline parse_pipeline(std::string_view name) {
  for (auto p : {Pipeline::cursor, Pipeline::baseline_prl, Pipeline::baseline_power}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown pipeline '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (problem != ProblemKind::bundle && template_path.empty() && n1 < 3) throw ConfigError("n1 must be at least 3");
  if (problem == ProblemKind::synthetic && n2 < n1) throw ConfigError("n2 must be at least n1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");
  if (!(noise_rel >= 0.0) || !std::isfinite(noise_rel)) throw ConfigError("noise_rel must be nonnegative");
  if (!(outlier_ratio >= 0.0) || !std::isfinite(outlier_ratio)) throw ConfigError("outlier_ratio must be nonnegative");
  if (!std::isfinite(theta_deg) || !std::isfinite(scale_beta)) throw ConfigError("theta_deg and scale_beta must be finite");
  if (problem == ProblemKind::bundle && bundle_path.empty()) throw ConfigError("bundle problems need bundle_path");
  if (c < 1 || k < 1 || r < 1 || r1 < 1) throw ConfigError("c, k, r and r1 must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  SolverConfig{alpha, tol, max_iter}.validate();
  for (const auto& g : {features.gamma0, features.gamma2, features.gamma3}) {
    if (g && (!(*g >= 0.0) || !std::isfinite(*g))) throw ConfigError("gammas must be finite and nonnegative");
  }
  if (!(features.edge_orientation >= 0.0 && features.edge_orientation <= 1.0)) {
    throw ConfigError("edge_orientation must lie in [0, 1]");
  }
}

std::size_t memory_estimate(std::size_t nnz, std::size_t n1, std::size_t n2, std::size_t c) {
  return nnz * (3 * kIndexBytes + kValueBytes) + kValueBytes * (n1 * n2 * c + c * c);
}

std::size_t resolve_t(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2) {
  if (cfg.t > 0) return cfg.t;
  const double share = cfg.problem == ProblemKind::synthetic ? 1.0 : 0.3;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share * static_cast<double>(n1 * n2))));
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Problem make_problem(const ExperimentConfig& cfg, std::uint64_t trial_seed, const Problem* loaded,
                     const PointSet* template_points) {
  switch (cfg.problem) {
    case ProblemKind::synthetic: {
      ProblemConfig pc{cfg.n1, cfg.n2, cfg.sigma, derive_seed(trial_seed, "problem")};
      return gen_synthetic(pc);
    }
    case ProblemKind::deformed: {
      const DeformSpec spec{cfg.theta_deg * std::numbers::pi / 180.0, cfg.scale_beta, cfg.noise_rel,
                            cfg.outlier_ratio};
      if (template_points) return make_deformed_problem(*template_points, spec, derive_seed(trial_seed, "problem"));
      Rng rng(derive_seed(trial_seed, "template"));
      std::vector<Point> pts(cfg.n1);
      for (auto& p : pts) {
        p.x = rng.normal();
        p.y = rng.normal();
      }
      return make_deformed_problem(PointSet(std::move(pts)), spec, derive_seed(trial_seed, "problem"));
    }
    case ProblemKind::bundle: return *loaded;
  }
  throw ConfigError("unknown problem kind");
}

RunRecord run_trial(const ExperimentConfig& cfg, std::size_t trial, const Problem& problem) {
  const std::uint64_t trial_seed = derive_seed(cfg.seed, "trial", trial);
  const PointSet p1 = normalize(problem.source);
  const PointSet p2 = normalize(problem.target);
  const std::size_t n1 = p1.size(), n2 = p2.size();
  const std::size_t t = resolve_t(cfg, n1, n2);
  const bool cursor = cfg.pipeline == Pipeline::cursor;

  RunRecord rec;
  rec.trial = trial;
  rec.method = std::string(to_string(cfg.pipeline));
  rec.n1 = n1;
  rec.n2 = n2;
  rec.sigma = cfg.problem == ProblemKind::synthetic ? cfg.sigma : cfg.noise_rel;
  rec.c = cursor ? cfg.c : 0;
  rec.k = cursor ? cfg.k : n2;
  rec.r = cursor ? cfg.r : cfg.r1;
  rec.t = t;
  rec.alpha = cfg.alpha;

  const SolverConfig solver{cfg.alpha, cfg.tol, cfg.max_iter};
  try {
    auto start = Clock::now();
    const FirstOrderCompat m = first_order(p1, p2, cfg.features);
    const auto triples = sample_hyperedges(n1, t, derive_seed(trial_seed, "hyperedges"));
    const double gamma3 = resolve_gamma3(p1, p2, cfg.features, derive_seed(trial_seed, "gamma3"));

    SparseTensor3 tensor;
    if (cursor) {
      if (cfg.c > n1 * n2) throw ConfigError("c exceeds n1 * n2");
      if (cfg.k > n2) throw ConfigError("k exceeds n2");
      const CurFactors f = build_cur(p1, p2, cfg.c, derive_seed(trial_seed, "cur"), cfg.features);
      const SolveReport second = prl2_match(f, m.m, solver);
      const CandidateSet cands = top_k(second.soft, cfg.k);
      rec.iters2 = second.iterations;
      rec.hit_rate = hit_rate(cands, problem.truth);
      rec.wall_ms_stage1 = ms_since(start);

      start = Clock::now();
      tensor = generate_fiber_cur(p1, p2, cands, triples, cfg.r, gamma3, cfg.threads);
      rec.wall_ms_stage2 = ms_since(start);
    } else {
      rec.hit_rate = 1.0;
      rec.wall_ms_stage1 = ms_since(start);
      start = Clock::now();
      tensor = generate_exhaustive(p1, p2, triples, cfg.r1, gamma3, cfg.budget, cfg.threads);
      rec.wall_ms_stage2 = ms_since(start);
    }
    rec.nnz = tensor.nnz();
    rec.mem_bytes = memory_estimate(rec.nnz, n1, n2, rec.c);

    start = Clock::now();
    SolveReport third = cfg.pipeline == Pipeline::baseline_power ? power_match(tensor, solver, cfg.threads)
                                                                  : prl3_match(tensor, m.m, solver, cfg.threads);
    const MatchResult result = discretize(std::move(third));
    rec.wall_ms_stage3 = ms_since(start);
    rec.iters3 = result.iterations;
    rec.converged = result.converged;
    rec.accuracy = accuracy(result.assignment, problem.truth);
  } catch (const ResourceError& e) {
    rec.status = "resource_error";
    rec.message = e.what();
    rec.accuracy.reset();
  }
  if (!cfg.record_timing) rec.wall_ms_stage1 = rec.wall_ms_stage2 = rec.wall_ms_stage3 = 0.0;
  return rec;
}

}  // namespace

Problem make_trial_problem(const ExperimentConfig& cfg, std::size_t trial) {
  cfg.validate();
  std::optional<Problem> loaded;
  if (cfg.problem == ProblemKind::bundle) loaded = load_bundle(cfg.bundle_path);
  std::optional<PointSet> template_points;
  if (cfg.problem == ProblemKind::deformed && !cfg.template_path.empty()) {
    template_points = load_pointset(cfg.template_path);
  }
  return make_problem(cfg, derive_seed(cfg.seed, "trial", trial), loaded ? &*loaded : nullptr,
                      template_points ? &*template_points : nullptr);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<Problem> loaded;
  if (cfg.problem == ProblemKind::bundle) loaded = load_bundle(cfg.bundle_path);
  std::optional<PointSet> template_points;
  if (cfg.problem == ProblemKind::deformed && !cfg.template_path.empty()) {
    template_points = load_pointset(cfg.template_path);
  }
  std::vector<RunRecord> out;
  out.reserve(cfg.trials);
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, "trial", trial);
    const Problem problem = make_problem(cfg, trial_seed, loaded ? &*loaded : nullptr,
                                         template_points ? &*template_points : nullptr);
    out.push_back(run_trial(cfg, trial, problem));
  }
  return out;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::sigma: return "sigma";
    case SweepAxis::k: return "k";
    case SweepAxis::r: return "r";
    case SweepAxis::c: return "c";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::outlier_ratio: return "outlier_ratio";
    case SweepAxis::theta: return "theta";
    case SweepAxis::scale_beta: return "scale_beta";
  }
  return "sigma";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::sigma, SweepAxis::k, SweepAxis::r, SweepAxis::c, SweepAxis::alpha,
                 SweepAxis::outlier_ratio, SweepAxis::theta, SweepAxis::scale_beta}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

namespace {

std::size_t as_count(double value, std::string_view axis) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 1e12) {
    throw ConfigError(std::string(axis) + " sweep values must be positive integers");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

ExperimentConfig with_axis(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig out = cfg;
  const bool template_problem = cfg.problem != ProblemKind::synthetic;
  switch (axis) {
    case SweepAxis::sigma:
      (template_problem ? out.noise_rel : out.sigma) = value;
      break;
    case SweepAxis::k: out.k = as_count(value, "k"); break;
    case SweepAxis::r:
      if (cfg.pipeline == Pipeline::cursor) {
        out.r = as_count(value, "r");
      } else {
        out.r1 = as_count(value, "r");
      }
      break;
    case SweepAxis::c: out.c = as_count(value, "c"); break;
    case SweepAxis::alpha: out.alpha = value; break;
    case SweepAxis::outlier_ratio:
      if (cfg.problem != ProblemKind::deformed) throw ConfigError("outlier_ratio sweeps need a deformed problem");
      out.outlier_ratio = value;
      break;
    case SweepAxis::theta:
      if (cfg.problem != ProblemKind::deformed) throw ConfigError("theta sweeps need a deformed problem");
      out.theta_deg = value;
      break;
    case SweepAxis::scale_beta:
      if (cfg.problem != ProblemKind::deformed) throw ConfigError("scale_beta sweeps need a deformed problem");
      out.scale_beta = value;
      break;
  }
  if ((axis == SweepAxis::k || axis == SweepAxis::c) && cfg.pipeline != Pipeline::cursor) {
    throw ConfigError(std::string(to_string(axis)) + " sweeps apply to the cursor pipeline only");
  }
  out.validate();
  return out;
}

SweepRow aggregate(std::span<const RunRecord> records, SweepAxis axis, double value) {
  SweepRow row;
  row.axis = std::string(to_string(axis));
  row.value = value;
  row.trials = records.size();
  if (!records.empty()) row.method = records.front().method;
  std::vector<double> acc;
  double hit = 0.0, nnz = 0.0, iters = 0.0, conv = 0.0, wall = 0.0;
  for (const auto& r : records) {
    if (!r.ok() || !r.accuracy) {
      ++row.failures;
      continue;
    }
    acc.push_back(*r.accuracy);
    hit += r.hit_rate;
    nnz += static_cast<double>(r.nnz);
    iters += r.iters3;
    conv += r.converged ? 1.0 : 0.0;
    wall += r.wall_ms_stage1 + r.wall_ms_stage2 + r.wall_ms_stage3;
  }
  if (acc.empty()) {
    row.mean_accuracy = row.std_accuracy = std::nan("");
    return row;
  }
  const double n = static_cast<double>(acc.size());
  double mean = 0.0;
  for (const double a : acc) mean += a;
  mean /= n;
  double var = 0.0;
  for (const double a : acc) var += (a - mean) * (a - mean);
  row.mean_accuracy = mean;
  row.std_accuracy = std::sqrt(var / n);
  row.mean_hit_rate = hit / n;
  row.mean_nnz = nnz / n;
  row.mean_iters3 = iters / n;
  row.converged_rate = conv / n;
  row.mean_wall_ms = wall / n;
  return row;
}

SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, std::span<const double> values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult out;
  for (const double v : values) {
    const auto records = run_experiment(with_axis(cfg, axis, v));
    out.rows.push_back(aggregate(records, axis, v));
    out.records.insert(out.records.end(), records.begin(), records.end());
  }
  return out;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + std::string(name) + "'");
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json record_json(const RunRecord& r) {
  json j = json::object();
  j["trial"] = r.trial;
  j["method"] = r.method;
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  j["sigma"] = r.sigma;
  j["c"] = r.c;
  j["k"] = r.k;
  j["r"] = r.r;
  j["t"] = r.t;
  j["alpha"] = r.alpha;
  j["accuracy"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
  j["hit_rate"] = r.hit_rate;
  j["nnz"] = r.nnz;
  j["mem_bytes"] = r.mem_bytes;
  j["iters2"] = r.iters2;
  j["iters3"] = r.iters3;
  j["converged"] = r.converged;
  j["wall_ms_stage1"] = r.wall_ms_stage1;
  j["wall_ms_stage2"] = r.wall_ms_stage2;
  j["wall_ms_stage3"] = r.wall_ms_stage3;
  j["status"] = r.status;
  j["message"] = r.message;
  return j;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

void write_records(std::ostream& out, std::span<const RunRecord> records, OutputFormat format) {
  if (format == OutputFormat::json) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_json(r));
    out << json{{"records", arr}}.dump(2) << '\n';
    return;
  }
  out << "trial,method,n1,n2,sigma,c,k,r,t,alpha,accuracy,hit_rate,nnz,mem_bytes,iters2,iters3,converged,"
         "wall_ms_stage1,wall_ms_stage2,wall_ms_stage3\n";
  for (const auto& r : records) {
    out << r.trial << ',' << r.method << ',' << r.n1 << ',' << r.n2 << ',' << num(r.sigma) << ',' << r.c << ','
        << r.k << ',' << r.r << ',' << r.t << ',' << num(r.alpha) << ','
        << (r.accuracy ? num(*r.accuracy) : std::string()) << ',' << num(r.hit_rate) << ',' << r.nnz << ','
        << r.mem_bytes << ',' << r.iters2 << ',' << r.iters3 << ',' << (r.converged ? 1 : 0) << ','
        << num(r.wall_ms_stage1) << ',' << num(r.wall_ms_stage2) << ',' << num(r.wall_ms_stage3) << '\n';
  }
}

void write_sweep(std::ostream& out, std::span<const SweepRow> rows, OutputFormat format) {
  if (format == OutputFormat::json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"axis", r.axis},
                     {"value", r.value},
                     {"method", r.method},
                     {"trials", r.trials},
                     {"failures", r.failures},
                     {"mean_accuracy", nullable(r.mean_accuracy)},
                     {"std_accuracy", nullable(r.std_accuracy)},
                     {"mean_hit_rate", r.mean_hit_rate},
                     {"mean_nnz", r.mean_nnz},
                     {"mean_iters3", r.mean_iters3},
                     {"converged_rate", r.converged_rate},
                     {"mean_wall_ms", r.mean_wall_ms}});
    }
    out << json{{"sweep", arr}}.dump(2) << '\n';
    return;
  }
  out << "axis,value,method,trials,failures,mean_accuracy,std_accuracy,mean_hit_rate,mean_nnz,mean_iters3,"
         "converged_rate,mean_wall_ms\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << num(r.value) << ',' << r.method << ',' << r.trials << ',' << r.failures << ','
        << num(r.mean_accuracy) << ',' << num(r.std_accuracy) << ',' << num(r.mean_hit_rate) << ','
        << num(r.mean_nnz) << ',' << num(r.mean_iters3) << ',' << num(r.converged_rate) << ','
        << num(r.mean_wall_ms) << '\n';
  }
}

void emit(std::span<const RunRecord> records, const std::filesystem::path& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_records(out, records, format);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<RunRecord> parse_records_json(std::string_view text) {
  std::vector<RunRecord> out;
  try {
    const json doc = json::parse(text);
    for (const auto& j : doc.at("records")) {
      RunRecord r;
      r.trial = j.at("trial").get<std::size_t>();
      r.method = j.at("method").get<std::string>();
      r.n1 = j.at("n1").get<std::size_t>();
      r.n2 = j.at("n2").get<std::size_t>();
      r.sigma = j.at("sigma").get<double>();
      r.c = j.at("c").get<std::size_t>();
      r.k = j.at("k").get<std::size_t>();
      r.r = j.at("r").get<std::size_t>();
      r.t = j.at("t").get<std::size_t>();
      r.alpha = j.at("alpha").get<double>();
      if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
      r.hit_rate = j.at("hit_rate").get<double>();
      r.nnz = j.at("nnz").get<std::size_t>();
      r.mem_bytes = j.at("mem_bytes").get<std::size_t>();
      r.iters2 = j.at("iters2").get<int>();
      r.iters3 = j.at("iters3").get<int>();
      r.converged = j.at("converged").get<bool>();
      r.wall_ms_stage1 = j.at("wall_ms_stage1").get<double>();
      r.wall_ms_stage2 = j.at("wall_ms_stage2").get<double>();
      r.wall_ms_stage3 = j.at("wall_ms_stage3").get<double>();
      r.status = j.at("status").get<std::string>();
      r.message = j.at("message").get<std::string>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid records file: ") + e.what());
  }
  return out;
}

namespace {

enum class FieldType { count, integer, real, boolean, text, seed };

struct Field {
  FieldType type;
  std::function<void(ExperimentConfig&, const json&)> set;
};

std::size_t get_count(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

double get_real(const json& v) {
  if (!v.is_number()) throw ConfigError("expected a number");
  return v.get<double>();
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"problem", {FieldType::text, [](auto& c, const json& v) { c.problem = parse_problem_kind(v.get<std::string>()); }}},
      {"n1", {FieldType::count, [](auto& c, const json& v) { c.n1 = get_count(v); }}},
      {"n2", {FieldType::count, [](auto& c, const json& v) { c.n2 = get_count(v); }}},
      {"sigma", {FieldType::real, [](auto& c, const json& v) { c.sigma = get_real(v); }}},
      {"theta_deg", {FieldType::real, [](auto& c, const json& v) { c.theta_deg = get_real(v); }}},
      {"scale_beta", {FieldType::real, [](auto& c, const json& v) { c.scale_beta = get_real(v); }}},
      {"noise_rel", {FieldType::real, [](auto& c, const json& v) { c.noise_rel = get_real(v); }}},
      {"outlier_ratio", {FieldType::real, [](auto& c, const json& v) { c.outlier_ratio = get_real(v); }}},
      {"template_path", {FieldType::text, [](auto& c, const json& v) { c.template_path = v.get<std::string>(); }}},
      {"bundle_path", {FieldType::text, [](auto& c, const json& v) { c.bundle_path = v.get<std::string>(); }}},
      {"pipeline", {FieldType::text, [](auto& c, const json& v) { c.pipeline = parse_pipeline(v.get<std::string>()); }}},
      {"c", {FieldType::count, [](auto& c, const json& v) { c.c = get_count(v); }}},
      {"k", {FieldType::count, [](auto& c, const json& v) { c.k = get_count(v); }}},
      {"r", {FieldType::count, [](auto& c, const json& v) { c.r = get_count(v); }}},
      {"r1", {FieldType::count, [](auto& c, const json& v) { c.r1 = get_count(v); }}},
      {"t", {FieldType::count, [](auto& c, const json& v) { c.t = get_count(v); }}},
      {"alpha", {FieldType::real, [](auto& c, const json& v) { c.alpha = get_real(v); }}},
      {"tol", {FieldType::real, [](auto& c, const json& v) { c.tol = get_real(v); }}},
      {"max_iter", {FieldType::integer, [](auto& c, const json& v) { c.max_iter = static_cast<int>(get_count(v)); }}},
      {"trials", {FieldType::count, [](auto& c, const json& v) { c.trials = get_count(v); }}},
      {"seed", {FieldType::seed, [](auto& c, const json& v) { c.seed = get_count(v); }}},
      {"budget", {FieldType::real, [](auto& c, const json& v) { c.budget = get_real(v); }}},
      {"threads", {FieldType::count, [](auto& c, const json& v) { c.threads = static_cast<unsigned>(get_count(v)); }}},
      {"record_timing", {FieldType::boolean, [](auto& c, const json& v) { c.record_timing = v.get<bool>(); }}},
      {"gamma0", {FieldType::real, [](auto& c, const json& v) { c.features.gamma0 = get_real(v); }}},
      {"gamma2", {FieldType::real, [](auto& c, const json& v) { c.features.gamma2 = get_real(v); }}},
      {"gamma3", {FieldType::real, [](auto& c, const json& v) { c.features.gamma3 = get_real(v); }}},
      {"edge_orientation", {FieldType::real, [](auto& c, const json& v) { c.features.edge_orientation = get_real(v); }}},
  };
  return table;
}

void apply(ExperimentConfig& cfg, std::string_view key, const json& value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    if (it->second.type == FieldType::text && !value.is_string()) throw ConfigError("expected a string");
    if (it->second.type == FieldType::boolean && !value.is_boolean()) throw ConfigError("expected true or false");
    it->second.set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

ExperimentConfig apply_object(const json& doc, ExperimentConfig cfg) {
  if (!doc.is_object()) throw ConfigError("config must be an object of key/value pairs");
  for (const auto& [key, value] : doc.items()) apply(cfg, key, value);
  cfg.validate();
  return cfg;
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = node.as_integer()) return json(v->get());
  if (const auto* v = node.as_floating_point()) return json(v->get());
  if (const auto* v = node.as_boolean()) return json(v->get());
  if (const auto* v = node.as_string()) return json(v->get());
  throw ConfigError("unsupported TOML value type");
}

}  // namespace

ExperimentConfig parse_config_json(std::string_view text, ExperimentConfig base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON config: ") + e.what());
  }
  return apply_object(doc, std::move(base));
}

ExperimentConfig parse_config_toml(std::string_view text, ExperimentConfig base) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string("invalid TOML config: ") + std::string(e.description()));
  }
  return apply_object(toml_to_json(tbl), std::move(base));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (path.extension() == ".toml") return parse_config_toml(ss.str());
  return parse_config_json(ss.str());
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

void set_config_field(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  const std::string text(value);
  json v;
  switch (it->second.type) {
    case FieldType::text: v = text; break;
    case FieldType::boolean:
      if (text != "true" && text != "false") throw ConfigError(std::string(key) + ": expected true or false");
      v = text == "true";
      break;
    case FieldType::count:
    case FieldType::integer:
    case FieldType::seed: {
      std::size_t pos = 0;
      unsigned long long n = 0;
      try {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        n = std::stoull(text, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != text.size()) throw ConfigError(std::string(key) + ": expected a nonnegative integer");
      v = static_cast<std::uint64_t>(n);
      break;
    }
    case FieldType::real: {
      std::size_t pos = 0;
      double d = 0.0;
      try {
        d = std::stod(text, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != text.size()) throw ConfigError(std::string(key) + ": expected a number");
      v = d;
      break;
    }
  }
  apply(cfg, key, v);
}

}  // namespace cursor
