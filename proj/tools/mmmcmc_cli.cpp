// Command-line front end: binds experiment configs to the sampling harness
// and emits CSV / summary artifacts.
//
// Exit codes are stable contracts: 0 success, 2 config error, 3 numerical
// error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmmcmc/config.hpp"
#include "mmmcmc/harness.hpp"

namespace fs = std::filesystem;
using namespace mmmcmc;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string presets_dir;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
  cmd->add_option("--config", args.config_path, "Path to a JSON experiment config");
  cmd->add_option("--preset", args.preset, "Name of a shipped preset (see presets/)");
  cmd->add_option("--presets-dir", args.presets_dir,
                  "Directory to resolve --preset names in");
  if (needs_out)
    cmd->add_option("--out", args.out_dir, "Output directory (created if missing)");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--threads", args.threads,
                  "Cap on parallel replications (0 = hardware concurrency)");
}

fs::path resolve_config_path(const CommonArgs& args) {
  if (!args.config_path.empty() && !args.preset.empty())
    throw ConfigError("pass either --config or --preset, not both");
  if (!args.config_path.empty()) return args.config_path;
  if (args.preset.empty())
    throw ConfigError("one of --config or --preset is required");

  fs::path dir;
  if (!args.presets_dir.empty()) {
    dir = args.presets_dir;
  } else if (const char* env = std::getenv("MMMCMC_PRESETS")) {
    dir = env;
  } else {
    dir = MMMCMC_DEFAULT_PRESET_DIR;
  }
  const fs::path path = dir / (args.preset + ".json");
  if (!fs::exists(path))
    throw ConfigError("preset '" + args.preset + "' not found at " +
                      path.string());
  return path;
}

ExperimentConfig load_and_check(const CommonArgs& args) {
  ExperimentConfig cfg = load_config_file(resolve_config_path(args));
  if (args.seed) cfg.seed = *args.seed;
  const ValidationReport vr = validate_config(cfg);
  for (const auto& w : vr.warnings) std::cerr << "warning: " << w << "\n";
  if (!vr.ok()) {
    std::string msg;
    for (const auto& e : vr.errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << contents;
}

std::string value_tag(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

int cmd_run(const CommonArgs& args) {
  const ExperimentConfig cfg = load_and_check(args);
  const GainReport report = run_experiment(cfg, args.threads);

  fs::create_directories(args.out_dir);
  std::ostringstream csv, summary;
  write_replications_csv(report, csv);
  write_summary(report, summary);
  write_file(fs::path(args.out_dir) / "replications.csv", csv.str());
  write_file(fs::path(args.out_dir) / "summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int cmd_scan(const CommonArgs& args, std::string axis,
             std::vector<double> values) {
  const ExperimentConfig cfg = load_and_check(args);
  if (axis.empty() && cfg.scan_spec) axis = cfg.scan_spec->axis;
  if (values.empty() && cfg.scan_spec) values = cfg.scan_spec->values;
  if (axis.empty() || values.empty())
    throw ConfigError(
        "scan needs an axis and values (flags --axis/--values or a 'scan' "
        "config section)");

  const std::vector<GainReport> reports = scan(cfg, axis, values, args.threads);

  fs::create_directories(args.out_dir);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::ostringstream csv, summary;
    write_replications_csv(reports[i], csv);
    write_summary(reports[i], summary);
    const std::string tag = axis + "=" + value_tag(values[i]);
    write_file(fs::path(args.out_dir) / ("replications_" + tag + ".csv"),
               csv.str());
    write_file(fs::path(args.out_dir) / ("summary_" + tag + ".txt"),
               summary.str());
  }
  std::ostringstream gains;
  write_gains_csv(axis, values, reports, gains);
  write_file(fs::path(args.out_dir) / "gains.csv", gains.str());
  std::cout << gains.str();
  return 0;
}

int cmd_kde(const CommonArgs& args) {
  const ExperimentConfig cfg = load_and_check(args);
  const Model model = make_model(cfg.model);

  const std::size_t g = cfg.kde_spec.grid_points;
  const double lo = model.rc_domain.lo;
  const double width = model.rc_domain.length() / static_cast<double>(g);
  std::vector<double> grid(g);
  for (std::size_t i = 0; i < g; ++i)
    grid[i] = lo + (static_cast<double>(i) + 0.5) * width;

  fs::create_directories(args.out_dir);
  const ChainOptions opts{cfg.burn_in, cfg.store_stride, false};
  for (std::size_t si = 0; si < cfg.samplers.size(); ++si) {
    const SamplerSpec& spec = cfg.samplers[si];
    const ChainRecord rec = run_sampler_chain(
        model, cfg, spec, nullptr, replication_seed(cfg, si, 0), opts);
    const std::vector<double> density =
        kde(rec.rc_samples, cfg.kde_spec.bandwidth, grid, model.rc_domain);
    std::ostringstream os;
    write_kde_csv(grid, density, os);
    write_file(fs::path(args.out_dir) / ("kde_" + spec.name + ".csv"),
               os.str());
  }

  // Quadrature reference density of the exact marginal, same grid.
  const FreeEnergy& fe = model.free_energy("A_exact");
  const double z_a = normalize_free_energy(fe, cfg.model.beta);
  std::vector<double> ref(g);
  for (std::size_t i = 0; i < g; ++i)
    ref[i] = std::exp(-cfg.model.beta * fe.value(grid[i])) / z_a;
  std::ostringstream os;
  write_kde_csv(grid, ref, os);
  write_file(fs::path(args.out_dir) / "kde_reference.csv", os.str());
  return 0;
}

int cmd_validate(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config_file(resolve_config_path(args));
  std::cout << "ok: config parsed (" << cfg.name << ")\n";
  const ValidationReport structural = validate_config(cfg);
  for (const auto& e : structural.errors) std::cout << "error: " << e << "\n";
  for (const auto& w : structural.warnings)
    std::cout << "warning: " << w << "\n";
  if (!structural.ok()) return 2;
  std::cout << "ok: cross-validation against model '" << cfg.model.id
            << "'\n";

  const ValidationReport numeric = validate_numerics(cfg);
  for (const auto& e : numeric.errors) std::cout << "error: " << e << "\n";
  for (const auto& w : numeric.warnings) std::cout << "warning: " << w << "\n";
  if (!numeric.ok()) return 2;
  std::cout << "ok: gradient finite-difference spot check\n";
  std::cout << "ok: n_lambda grid adequacy\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale micro-macro MCMC benchmark harness"};
  app.require_subcommand(1);

  CommonArgs run_args, scan_args, kde_args, validate_args;
  std::string scan_axis;
  std::vector<double> scan_values;

  CLI::App* run = app.add_subcommand("run", "Run an experiment and write CSV + summary");
  add_common(run, run_args, true);
  CLI::App* scan_cmd = app.add_subcommand("scan", "Run an experiment per axis value");
  add_common(scan_cmd, scan_args, true);
  scan_cmd->add_option("--axis", scan_axis, "Scan axis: epsilon | lambda");
  scan_cmd->add_option("--values", scan_values, "Axis values")->delimiter(',');
  CLI::App* kde_cmd = app.add_subcommand("kde", "Run chains once and write kernel density estimates");
  add_common(kde_cmd, kde_args, true);
  CLI::App* validate = app.add_subcommand("validate", "Dry-run config checks; no sampling");
  add_common(validate, validate_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (scan_cmd->parsed()) return cmd_scan(scan_args, scan_axis, scan_values);
    if (kde_cmd->parsed()) return cmd_kde(kde_args);
    if (validate->parsed()) return cmd_validate(validate_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
