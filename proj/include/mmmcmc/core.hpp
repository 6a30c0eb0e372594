#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mmmcmc/errors.hpp"
#include "mmmcmc/rng.hpp"

namespace mmmcmc {

using Vec = std::vector<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Domain of a scalar reaction coordinate. Non-periodic domains are open
/// intervals (lo, hi); periodic ones identify z with z + length() and are
/// normalized into (lo, hi].
struct RcDomain {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double length() const { return hi - lo; }
  bool contains(double z) const { return periodic || (z > lo && z < hi); }
  double wrap(double z) const;
  /// Signed difference a - b, reduced to (-length/2, length/2] when periodic.
  double signed_diff(double a, double b) const;
};

/// A named free-energy curve A(z) with analytic gradient. For periodic
/// domains, value/gradient normalize their argument internally.
struct FreeEnergy {
  std::string name;
  RcDomain domain;
  std::function<double(double)> value;
  std::function<double(double)> gradient;
};

/// Draws microstates on the fiber of a reaction-coordinate value, and
/// evaluates the matching log-density in the model's fiber parametrization.
/// Normalization constants are included, so ratios across variants are
/// meaningful.
struct Reconstruction {
  std::string name;
  std::function<Vec(double z, RngEngine&)> sample;
  std::function<double(const Vec& x, double z)> log_density;
};

/// Immutable description of one molecular model. All callables are pure and
/// the struct is safe to share across threads once built. Pointers into the
/// catalogs stay valid for the lifetime of the Model instance they were
/// taken from.
struct Model {
  std::string id;
  int dim = 0;
  double epsilon = 0.0;  // time-scale separation; 0 when not applicable
  double beta = 1.0;     // inverse temperature the catalogs were built with
  RcDomain rc_domain;
  std::function<double(const Vec&)> potential;
  std::function<Vec(const Vec&)> potential_gradient;
  std::function<double(const Vec&)> rc;
  std::function<Vec(const Vec&)> rc_gradient;
  /// Optional in-place normalization (wraps periodic angles) applied after
  /// accepted proposals.
  std::function<void(Vec&)> normalize_state;
  std::map<std::string, FreeEnergy> free_energies;
  std::map<std::string, Reconstruction> reconstructions;
  Vec initial_state;

  const FreeEnergy& free_energy(const std::string& name) const;
  const Reconstruction& reconstruction(const std::string& name) const;
};

/// log mu(x) up to the (never computed) normalization constant: -beta V(x).
/// Non-finite potentials map to -inf, which acceptance logic treats as
/// certain rejection.
double gibbs_log_density(const Model& model, const Vec& x, double beta);

/// log mu0(z) up to normalization: -beta A(z); -inf outside the domain.
double free_energy_log_density(const FreeEnergy& fe, double z, double beta);

/// Central finite difference of f along coordinate i at step h.
double central_difference(const std::function<double(const Vec&)>& f, Vec x,
                          std::size_t i, double h);

/// Largest relative mismatch between an analytic gradient and central finite
/// differences over the given states. Components are compared at scale
/// max(|analytic|, 1).
double max_gradient_error(const std::function<double(const Vec&)>& f,
                          const std::function<Vec(const Vec&)>& grad,
                          const std::vector<Vec>& states, double h = 1e-6);

}  // namespace mmmcmc
