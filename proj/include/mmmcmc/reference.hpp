#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "mmmcmc/core.hpp"

namespace mmmcmc {

/// Composite 16-point Gauss-Legendre quadrature of f over [a, b]. The panel
/// count is doubled until two successive estimates agree to rel_tol. Throws
/// NumericalError when max_refine doublings are not enough.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, int max_refine = 22);

/// Z_A: integral of exp(-beta A) over the free energy's domain (one period
/// for periodic domains).
double normalize_free_energy(const FreeEnergy& fe, double beta,
                             double rel_tol = 1e-10);
double normalize_free_energy(const FreeEnergy& fe, double beta, double lo,
                             double hi, double rel_tol);

/// Quadrature of the mu0-expectation of f, mu0 proportional to exp(-beta A).
double reference_moment(const std::function<double(double)>& f,
                        const FreeEnergy& fe, double beta,
                        double rel_tol = 1e-10);

/// Cache key of a precomputed N_lambda table. Tables are invalidated by key
/// equality: any mismatch forces a rebuild.
struct NLambdaKey {
  std::string model_id;
  double lambda = 0.0;
  double beta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t nodes = 0;
  bool periodic = false;

  bool operator==(const NLambdaKey&) const = default;
};

/// Largest node spacing allowed at bias stiffness lambda: a quarter of the
/// Gaussian kernel width 1/sqrt(lambda beta).
double n_lambda_max_spacing(double lambda, double beta);

/// Tabulated N_lambda(z)/Z_V over the rc domain: the Gaussian smoothing of
/// mu0 at scale 1/sqrt(lambda beta), evaluated by quadrature on a uniform
/// grid and interpolated cubically in between. Built once, then immutable
/// and shareable.
class NLambdaTable {
 public:
  /// nodes == 0 derives the node count from the spacing rule; an explicit
  /// count that is too coarse throws ConfigError.
  static NLambdaTable build(const std::string& model_id, const FreeEnergy& mu0,
                            double lambda, double beta,
                            std::uint32_t nodes = 0, double rel_tol = 1e-10);

  double value(double z) const;
  double log_value(double z) const;

  const NLambdaKey& key() const { return key_; }
  std::span<const double> node_values() const { return values_; }
  double node_spacing() const { return spacing_; }

  /// Flat binary cache; load returns nullopt when the file is missing,
  /// malformed, or keyed differently.
  void save(const std::filesystem::path& path) const;
  static std::optional<NLambdaTable> load(const std::filesystem::path& path,
                                          const NLambdaKey& expected);

 private:
  NLambdaTable() = default;

  NLambdaKey key_;
  RcDomain domain_;
  std::vector<double> values_;
  double spacing_ = 0.0;
};

/// Dominant stationary distribution of a row-stochastic matrix (row-major,
/// n x n) by power iteration to 1e-12 residual. Rows whose sums deviate from
/// 1 by more than 1e-9 are an assembly error.
std::vector<double> brute_force_stationary(
    const std::vector<double>& transition_row_major, std::size_t n);

}  // namespace mmmcmc
