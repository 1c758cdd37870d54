// cursor: generate problems, run matching pipelines and parameter sweeps.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cursor/bench.hpp"
#include "cursor/error.hpp"
#include "cursor/problems.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kResource = 3, kIo = 4 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

// Every ExperimentConfig field becomes a --<key> option on the subcommand.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path, "JSON or TOML experiment config");
    if (config_required) opt->required();
    for (const auto& key : cursor::config_keys()) {
      cmd->add_option("--" + key, values[key], "override config field " + key);
    }
  }

  cursor::ExperimentConfig resolve(const Globals& g, CLI::App* cmd) const {
    cursor::ExperimentConfig cfg = config_path.empty() ? cursor::ExperimentConfig{} : cursor::load_config(config_path);
    if (g.seed) cfg.seed = *g.seed;
    for (const auto& [key, value] : values) {
      if (cmd->count("--" + key) > 0) cursor::set_config_field(cfg, key, value);
    }
    cfg.validate();
    return cfg;
  }
};

template <typename Writer>
void write_output(const Globals& g, Writer write) {
  if (g.out.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(g.out, std::ios::binary | std::ios::trunc);
  if (!out) throw cursor::IoError("cannot write " + g.out);
  write(out);
  out.flush();
  if (!out) throw cursor::IoError("write failed: " + g.out);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw cursor::ConfigError("invalid sweep value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw cursor::ConfigError("--values is empty");
  return values;
}

int run(int argc, char** argv) {
  CLI::App app{"Hypergraph matching with CUR-guided sparse compatibility tensors"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "root seed")->expected(1);
  app.add_option("--out", g.out, "output path (default: stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* gen = app.add_subcommand("gen", "write the problem of trial 0 as a JSON bundle");
  ConfigOptions gen_opts;
  gen_opts.attach(gen, false);

  auto* match = app.add_subcommand("match", "run a single trial");
  ConfigOptions match_opts;
  match_opts.attach(match, false);

  auto* bench = app.add_subcommand("bench", "run an experiment config");
  ConfigOptions bench_opts;
  bench_opts.attach(bench, true);

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
  ConfigOptions sweep_opts;
  sweep_opts.attach(sweep, false);
  std::string axis;
  std::string values;
  std::string records_path;
  sweep->add_option("--axis", axis, "sigma, k, r, c, alpha, outlier_ratio, theta or scale_beta")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();
  sweep->add_option("--records", records_path, "also write per-trial records here");

  for (auto* cmd : {gen, match, bench, sweep}) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const auto format = cursor::parse_output_format(g.format);

  if (gen->parsed()) {
    const auto cfg = gen_opts.resolve(g, gen);
    if (g.out.empty()) throw cursor::ConfigError("gen needs --out");
    const cursor::Problem p = cursor::make_trial_problem(cfg, 0);
    const cursor::ProblemConfig pc{p.source.size(), p.target.size(),
                                   cfg.problem == cursor::ProblemKind::synthetic ? cfg.sigma : cfg.noise_rel,
                                   cfg.seed};
    cursor::save_bundle(p, pc, g.out);
    return kOk;
  }

  if (match->parsed() || bench->parsed()) {
    auto* cmd = match->parsed() ? match : bench;
    auto cfg = (match->parsed() ? match_opts : bench_opts).resolve(g, cmd);
    if (match->parsed() && cmd->count("--trials") == 0) cfg.trials = 1;
    const auto records = cursor::run_experiment(cfg);
    write_output(g, [&](std::ostream& os) { cursor::write_records(os, records, format); });
    bool failed = false;
    for (const auto& r : records) {
      if (r.ok()) continue;
      failed = true;
      std::cerr << "trial " << r.trial << ": " << r.status << ": " << r.message << '\n';
    }
    return failed ? kResource : kOk;
  }

  const auto cfg = sweep_opts.resolve(g, sweep);
  const auto result = cursor::sweep(cfg, cursor::parse_sweep_axis(axis), parse_values(values));
  write_output(g, [&](std::ostream& os) { cursor::write_sweep(os, result.rows, format); });
  if (!records_path.empty()) cursor::emit(result.records, records_path, format);
  for (const auto& row : result.rows) {
    if (row.failures > 0) return kResource;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cursor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const cursor::PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const cursor::ResourceError& e) {
    std::cerr << "resource budget exceeded: " << e.what() << '\n';
    return kResource;
  } catch (const cursor::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
