#include "cursor/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cursor/error.hpp"
#include "cursor/rng.hpp"

namespace cursor {

using json = nlohmann::json;

PointSet::PointSet(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.size() < 3) {
    throw PreconditionError("point set needs at least 3 points, got " + std::to_string(points_.size()));
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw PreconditionError("point set contains a non-finite coordinate");
    }
  }
}

void GroundTruth::validate(std::size_t n2) const {
  std::vector<bool> seen(n2, false);
  for (const auto j : mapping) {
    if (j >= n2) throw PreconditionError("ground truth entry out of range");
    if (seen[j]) throw PreconditionError("ground truth is not injective");
    seen[j] = true;
  }
}

void ProblemConfig::validate() const {
  if (n1 < 3) throw ConfigError("n1 must be at least 3");
  if (n2 < n1) throw ConfigError("n2 must be at least n1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be a finite value >= 0");
}

CoordStats coord_stats(const PointSet& ps) {
  CoordStats st;
  st.count = ps.size();
  const double n = static_cast<double>(ps.size());
  for (const auto& p : ps.points()) {
    st.mean.x += p.x;
    st.mean.y += p.y;
  }
  st.mean.x /= n;
  st.mean.y /= n;
  double ss = 0.0;
  for (const auto& p : ps.points()) {
    const double dx = p.x - st.mean.x;
    const double dy = p.y - st.mean.y;
    ss += dx * dx + dy * dy;
  }
  st.sigma0 = std::sqrt(ss / (2.0 * n));
  return st;
}

namespace {

Point gaussian_point(Rng& rng, const Point& mean, double stddev) {
  const double x = rng.normal(mean.x, stddev);
  const double y = rng.normal(mean.y, stddev);
  return {x, y};
}

}  // namespace

Problem gen_synthetic(const ProblemConfig& cfg) {
  cfg.validate();
  Rng point_rng(derive_seed(cfg.seed, "points"));
  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  Rng perm_rng(derive_seed(cfg.seed, "permutation"));
  Rng outlier_rng(derive_seed(cfg.seed, "outliers"));

  std::vector<Point> source(cfg.n1);
  for (auto& p : source) p = gaussian_point(point_rng, {0.0, 0.0}, 1.0);
  PointSet src(std::move(source));

  std::vector<std::uint32_t> perm(cfg.n2);
  std::iota(perm.begin(), perm.end(), 0U);
  perm_rng.shuffle(std::span(perm));

  std::vector<Point> target(cfg.n2);
  GroundTruth truth;
  truth.mapping.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cfg.n1));
  for (std::size_t i = 0; i < cfg.n1; ++i) {
    const Point& p = src[i];
    target[perm[i]] = {p.x + cfg.sigma * noise_rng.normal(), p.y + cfg.sigma * noise_rng.normal()};
  }
  const CoordStats st = coord_stats(src);
  for (std::size_t s = cfg.n1; s < cfg.n2; ++s) {
    target[perm[s]] = gaussian_point(outlier_rng, st.mean, st.sigma0);
  }
  return {std::move(src), PointSet(std::move(target)), std::move(truth)};
}

PointSet deform(const PointSet& ps, const Deformation& kind, std::uint64_t seed, const CoordStats* reference) {
  const CoordStats st = reference ? *reference : coord_stats(ps);
  std::vector<Point> pts(ps.points().begin(), ps.points().end());
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Rotate>) {
          const double c = std::cos(d.theta);
          const double s = std::sin(d.theta);
          for (auto& p : pts) p = {c * p.x - s * p.y, s * p.x + c * p.y};
        } else if constexpr (std::is_same_v<T, ScaleX>) {
          if (!(d.factor > 0.0) || !std::isfinite(d.factor)) throw ConfigError("scale factor must be positive");
          for (auto& p : pts) p.x *= d.factor;
        } else if constexpr (std::is_same_v<T, Noise>) {
          if (!(d.sigma_rel >= 0.0)) throw ConfigError("relative noise must be >= 0");
          Rng rng(derive_seed(seed, "noise"));
          const double sigma = d.sigma_rel * st.sigma0;
          for (auto& p : pts) {
            p.x += sigma * rng.normal();
            p.y += sigma * rng.normal();
          }
        } else {
          if (!(d.ratio >= 0.0)) throw ConfigError("outlier ratio must be >= 0");
          Rng rng(derive_seed(seed, "outliers"));
          const auto count = static_cast<std::size_t>(std::llround(d.ratio * static_cast<double>(st.count)));
          for (std::size_t i = 0; i < count; ++i) pts.push_back(gaussian_point(rng, st.mean, st.sigma0));
        }
      },
      kind);
  return PointSet(std::move(pts));
}

Problem make_deformed_problem(const PointSet& source, const DeformSpec& spec, std::uint64_t seed) {
  const CoordStats ref = coord_stats(source);
  PointSet t = deform(source, Rotate{spec.theta}, seed);
  t = deform(t, ScaleX{std::pow(1.1, spec.scale_beta)}, seed);
  t = deform(t, Noise{spec.noise_rel}, derive_seed(seed, "deform-noise"), &ref);
  t = deform(t, Outliers{spec.outlier_ratio}, derive_seed(seed, "deform-outliers"), &ref);

  const std::size_t n2 = t.size();
  std::vector<std::uint32_t> perm(n2);
  std::iota(perm.begin(), perm.end(), 0U);
  Rng perm_rng(derive_seed(seed, "permutation"));
  perm_rng.shuffle(std::span(perm));

  std::vector<Point> shuffled(n2);
  for (std::size_t s = 0; s < n2; ++s) shuffled[perm[s]] = t[s];
  GroundTruth truth;
  truth.mapping.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(source.size()));
  return {source, PointSet(std::move(shuffled)), std::move(truth)};
}

PointSet normalize(const PointSet& ps) {
  const CoordStats st = coord_stats(ps);
  std::vector<Point> pts(ps.points().begin(), ps.points().end());
  for (auto& p : pts) {
    p.x -= st.mean.x;
    p.y -= st.mean.y;
  }
  return PointSet(std::move(pts));
}

// ---------------------------------------------------------------------------
// File formats

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view s, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<Point> parse_csv(std::string_view text) {
  std::vector<Point> pts;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'x,y'");
    }
    pts.push_back({parse_number(line.substr(0, comma), line_no), parse_number(line.substr(comma + 1), line_no)});
  }
  return pts;
}

std::vector<Point> points_from_json(const json& arr) {
  if (!arr.is_array()) throw ParseError("\"points\" must be an array");
  std::vector<Point> pts;
  pts.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError("each point must be a [x, y] pair of numbers");
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

PointSet checked_pointset(std::vector<Point> pts) {
  if (pts.size() < 3) throw ParseError("point set needs at least 3 points, got " + std::to_string(pts.size()));
  try {
    return PointSet(std::move(pts));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json pointset_json(const PointSet& ps) {
  json arr = json::array();
  for (const auto& p : ps.points()) arr.push_back({p.x, p.y});
  return json{{"points", std::move(arr)}};
}

}  // namespace

PointSet parse_pointset(std::string_view text, PointFormat format) {
  if (format == PointFormat::csv) return checked_pointset(parse_csv(text));
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("points")) throw ParseError("JSON point set needs a \"points\" array");
  return checked_pointset(points_from_json(doc.at("points")));
}

PointSet load_pointset(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  return parse_pointset(text, is_json ? PointFormat::json : PointFormat::csv);
}

std::string format_pointset(const PointSet& ps, PointFormat format) {
  std::string out;
  if (format == PointFormat::csv) {
    for (const auto& p : ps.points()) out += fmt17(p.x) + "," + fmt17(p.y) + "\n";
    return out;
  }
  out = "{\"points\": [";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += "[" + fmt17(ps[i].x) + ", " + fmt17(ps[i].y) + "]";
  }
  out += "]}\n";
  return out;
}

void save_pointset(const PointSet& ps, const std::filesystem::path& path, PointFormat format) {
  write_file(path, format_pointset(ps, format));
}

void save_bundle(const Problem& problem, const ProblemConfig& cfg, const std::filesystem::path& path) {
  json doc;
  doc["source"] = pointset_json(problem.source);
  doc["target"] = pointset_json(problem.target);
  doc["truth"] = problem.truth.mapping;
  doc["config"] = {{"n1", cfg.n1}, {"n2", cfg.n2}, {"sigma", cfg.sigma}, {"seed", cfg.seed}};
  write_file(path, doc.dump(1) + "\n");
}

Problem load_bundle(const std::filesystem::path& path, ProblemConfig* cfg) {
  json doc;
  try {
    doc = json::parse(read_file(path));
    PointSet source = checked_pointset(points_from_json(doc.at("source").at("points")));
    PointSet target = checked_pointset(points_from_json(doc.at("target").at("points")));
    GroundTruth truth{doc.at("truth").get<std::vector<std::uint32_t>>()};
    if (truth.mapping.size() != source.size()) throw ParseError("truth length differs from source size");
    try {
      truth.validate(target.size());
    } catch (const PreconditionError& e) {
      throw ParseError(e.what());
    }
    if (cfg && doc.contains("config")) {
      const auto& c = doc.at("config");
      cfg->n1 = c.value("n1", source.size());
      cfg->n2 = c.value("n2", target.size());
      cfg->sigma = c.value("sigma", 0.0);
      cfg->seed = c.value("seed", std::uint64_t{0});
    }
    return {std::move(source), std::move(target), std::move(truth)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid problem bundle: ") + e.what());
  }
}

}  // namespace cursor
