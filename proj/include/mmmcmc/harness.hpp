#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>

#include "mmmcmc/mm.hpp"

namespace mmmcmc {

/// Mean squared error of M replication estimates against a reference value.
double mse(std::span<const double> estimates, double reference);

/// (mse_base / mse_new) * (t_base / t_new); +inf when mse_new is zero.
double efficiency_gain(double mse_base, double mse_new, double t_base,
                       double t_new);

/// Gaussian kernel density estimate on a grid. Periodic domains wrap sample
/// images over plus/minus one period.
std::vector<double> kde(std::span<const double> samples, double bandwidth,
                        std::span<const double> grid, const RcDomain& domain);

/// Probability masses of samples over `bins` equal cells spanning the domain.
std::vector<double> rc_histogram(std::span<const double> samples,
                                 std::size_t bins, const RcDomain& domain);

/// Exact bin masses of mu0 proportional to exp(-beta A), by quadrature.
std::vector<double> rc_histogram_reference(const FreeEnergy& fe, double beta,
                                           std::size_t bins);

double l1_distance(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class SamplerType { mala, mm_direct, mm_indirect, macro_only };

struct KernelSpec {
  KernelKind kind = KernelKind::langevin;
  double dt = 0.0;
};

struct SamplerSpec {
  std::string name;
  SamplerType type = SamplerType::mala;
  /// mala: microscopic time step; empty means the model rule (epsilon for
  /// the three-atom molecule, 1/k_b for butane).
  std::optional<double> dt;
  KernelSpec kernel;  // mm-* and macro-only
  std::string free_energy = "A_exact";
  std::string reconstruction = "nu_exact";  // mm-direct
  double lambda = 0.0;                      // mm-indirect
  /// lambda = "auto" in the config: resolve to 1/epsilon (three-atom only).
  bool lambda_auto = false;
  int k_steps = 0;
  /// Inner MALA step; empty means min(epsilon, 1/lambda) for the three-atom
  /// molecule and 0.4/lambda for butane.
  std::optional<double> inner_dt;
  bool mh_correction = true;
};

struct ModelConfig {
  std::string id;         // "threeatom" | "butane"
  double epsilon = 1e-4;  // threeatom only
  double beta = 1.0;
  /// Test fixture: perturbs the analytic gradient so validation must fail.
  bool debug_broken_gradient = false;
};

struct KdeSpec {
  double bandwidth = 0.03;
  std::size_t grid_points = 400;
};

struct ScanSpec {
  std::string axis;  // "epsilon" | "lambda"
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model;
  /// samplers[0] is the baseline all gain ratios are computed against.
  std::vector<SamplerSpec> samplers;
  std::size_t steps = 1;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::size_t store_stride = 1;
  bool store_states = false;  // keep full microstates alongside rc samples
  std::vector<std::string> functionals = {"mean_rc", "var_rc"};
  KdeSpec kde_spec;
  std::optional<ScanSpec> scan_spec;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReplicationResult {
  std::map<std::string, double> estimates;  // per functional
  double macro_acc = kNaN;
  double micro_acc = kNaN;
  double seconds = 0.0;
};

struct MethodReport {
  std::string name;
  std::vector<ReplicationResult> replications;
  double macro_acc = kNaN;  // means over replications, NaN when n/a
  double micro_acc = kNaN;
  double mean_runtime_s = 0.0;
  std::map<std::string, double> mse;  // per functional
  // Ratios against the baseline sampler; NaN on the baseline itself.
  double runtime_gain = kNaN;
  std::map<std::string, double> variance_gain;
  std::map<std::string, double> total_gain;
};

struct GainReport {
  std::string name;
  std::string config_hash;
  std::map<std::string, double> reference;  // quadrature values per functional
  std::vector<MethodReport> methods;
};

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

Model make_model(const ModelConfig& cfg);

/// Per-replication seed; the scan index keeps axis values on separate
/// streams.
std::uint64_t replication_seed(const ExperimentConfig& cfg,
                               std::size_t sampler_index,
                               std::size_t replication,
                               std::size_t scan_index = 0);

/// Runs M replications of each configured sampler in a thread pool
/// (threads == 0 picks hardware concurrency) and assembles the gain report.
/// Results are bit-identical for a given config and seed regardless of the
/// thread count; wall-clock fields are the only nondeterministic output.
GainReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 0,
                          std::size_t scan_index = 0);

/// One report per axis value. axis "epsilon" applies to the three-atom model
/// only; axis "lambda" retargets every mm-indirect sampler.
std::vector<GainReport> scan(const ExperimentConfig& cfg,
                             const std::string& axis,
                             const std::vector<double>& values,
                             unsigned threads = 0);

/// Runs a single sampler chain (replication-style seeding); used by the kde
/// command and tests. The N_lambda table, when needed, is built internally
/// unless supplied.
ChainRecord run_sampler_chain(const Model& model, const ExperimentConfig& cfg,
                              const SamplerSpec& spec,
                              const NLambdaTable* table, std::uint64_t seed,
                              const ChainOptions& opts);

/// Builds the N_lambda table an indirect sampler needs (always from the
/// model's exact free energy).
NLambdaTable build_n_lambda(const Model& model, double lambda);

/// Effective bias stiffness of an indirect sampler (resolves lambda_auto).
double resolve_lambda(const Model& model, const SamplerSpec& spec);

/// FNV-1a of the canonical JSON form of the config.
std::string config_hash(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Output (schemas documented in the README and pinned by golden-file tests)
// ---------------------------------------------------------------------------

void write_replications_csv(const GainReport& report, std::ostream& os);
void write_summary(const GainReport& report, std::ostream& os);
void write_gains_csv(const std::string& axis, std::span<const double> values,
                     std::span<const GainReport> reports, std::ostream& os);
void write_kde_csv(std::span<const double> grid,
                   std::span<const double> density, std::ostream& os);

}  // namespace mmmcmc
