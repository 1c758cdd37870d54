#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cursor/features.hpp"
#include "cursor/problems.hpp"

namespace cursor {

enum class ProblemKind { synthetic, deformed, bundle };
enum class Pipeline { cursor, baseline_prl, baseline_power };

std::string_view to_string(ProblemKind kind);
std::string_view to_string(Pipeline pipeline);
/// Throw ConfigError for unknown names.
ProblemKind parse_problem_kind(std::string_view name);
Pipeline parse_pipeline(std::string_view name);

/// Everything one experiment needs. Field names double as config-file keys
/// and CLI flag names.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::synthetic;
  // synthetic: n1 sources, n2 targets, Gaussian noise sigma.
  // deformed: n1 template points (or template_path), deformed per the
  // theta_deg / scale_beta / noise_rel / outlier_ratio fields.
  std::size_t n1 = 30;
  std::size_t n2 = 30;
  double sigma = 0.02;
  double theta_deg = 0.0;
  double scale_beta = 0.0;
  double noise_rel = 0.02;
  double outlier_ratio = 0.0;
  std::string template_path;
  std::string bundle_path;

  Pipeline pipeline = Pipeline::cursor;
  std::size_t c = 100;
  std::size_t k = 5;
  std::size_t r = 25;
  std::size_t r1 = 300;
  std::size_t t = 0;  // 0: n1*n2 for synthetic, 0.3*n1*n2 otherwise
  double alpha = 0.2;
  double tol = 1e-8;
  int max_iter = 100;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double budget = 1e9;
  unsigned threads = 1;
  bool record_timing = true;
  FeatureConfig features;

  /// Throws ConfigError for counts below 1, alpha outside [0, 1] and other
  /// out-of-range values.
  void validate() const;
};

/// Per-trial outcome. accuracy is empty for failed trials.
struct RunRecord {
  std::size_t trial = 0;
  std::string method;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double sigma = 0.0;
  std::size_t c = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  std::size_t t = 0;
  double alpha = 0.0;
  std::optional<double> accuracy;
  double hit_rate = 0.0;
  std::size_t nnz = 0;
  std::size_t mem_bytes = 0;
  int iters2 = 0;
  int iters3 = 0;
  bool converged = false;
  double wall_ms_stage1 = 0.0;
  double wall_ms_stage2 = 0.0;
  double wall_ms_stage3 = 0.0;
  std::string status = "ok";
  std::string message;

  bool ok() const { return status == "ok"; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// nnz * (3 * 4 + 8) + 8 * (n1 * n2 * c + c * c).
std::size_t memory_estimate(std::size_t nnz, std::size_t n1, std::size_t n2, std::size_t c);

/// Resolved hyperedge count for a config and its problem size.
std::size_t resolve_t(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2);

/// The problem of one trial (bundle problems are loaded from disk).
Problem make_trial_problem(const ExperimentConfig& cfg, std::size_t trial);

/// Runs cfg.trials trials with seeds derived from cfg.seed. Problems and
/// sampled hyperedges depend on the trial seed only, so different pipelines
/// see identical inputs. A trial that exceeds the enumeration budget is
/// recorded with status "resource_error" and the run continues.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { sigma, k, r, c, alpha, outlier_ratio, theta, scale_beta };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

/// Copy of cfg with the axis field set to value.
ExperimentConfig with_axis(const ExperimentConfig& cfg, SweepAxis axis, double value);

/// Aggregate over the successful trials of one sweep point.
struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string method;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_hit_rate = 0.0;
  double mean_nnz = 0.0;
  double mean_iters3 = 0.0;
  double converged_rate = 0.0;
  double mean_wall_ms = 0.0;
};

SweepRow aggregate(std::span<const RunRecord> records, SweepAxis axis, double value);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<RunRecord> records;
};

SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, std::span<const double> values);

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(std::string_view name);

void write_records(std::ostream& out, std::span<const RunRecord> records, OutputFormat format);
void write_sweep(std::ostream& out, std::span<const SweepRow> rows, OutputFormat format);
/// Writes to path, throwing IoError when the file cannot be written.
void emit(std::span<const RunRecord> records, const std::filesystem::path& path, OutputFormat format);

std::vector<RunRecord> parse_records_json(std::string_view text);

/// Reads a JSON or TOML config (by extension, .toml for TOML) whose keys are
/// ExperimentConfig field names. Unknown keys and wrong value types raise
/// ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(std::string_view text, ExperimentConfig base = {});
ExperimentConfig parse_config_toml(std::string_view text, ExperimentConfig base = {});
/// Every config key, sorted.
std::vector<std::string> config_keys();
/// Applies one key given as text (CLI style). Throws ConfigError.
void set_config_field(ExperimentConfig& cfg, std::string_view key, std::string_view value);

}  // namespace cursor
