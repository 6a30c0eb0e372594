#pragma once

#include "mmmcmc/core.hpp"

namespace mmmcmc {

enum class ReconVariant { exact, wide };

/// Force-field constants of the united-atom butane chain (3 bonds, 2 bends,
/// 1 torsion).
struct ButaneParams {
  double k_b = 1.17e6;
  double k_a = 62500.0;
  double r0 = 1.53;
  double theta0 = 1.9547687622336491;  // 112 degrees
  double c0 = 1031.36;
  double c1 = 2037.82;
  double c2 = 158.52;
  double c3 = -3227.7;
};

inline constexpr double kButaneDefaultBeta = 1.0 / 300.0;

/// Torsion potential V_phi(phi) = c0 + c1 cos phi + c2 cos^2 phi + c3 cos^3 phi.
double butane_torsion_potential(double phi);

/// Three-atom molecule in the plane: state (x_a, x_c, y_c), stiffness epsilon,
/// reaction coordinate theta = atan2(y_c, x_c) on (0, pi).
///
/// Free energies: A_exact, A_shift (minima moved 0.1 rad outward), A_cos
/// (A_exact + cos theta). Reconstructions: nu_exact (variance eps/beta on
/// x_a and r_c), nu_wide (variances doubled).
Model three_atom_model(double epsilon, double beta = 1.0);

/// United-atom butane in internal coordinates: state (r1, r2, r3, a1, a2, phi),
/// reaction coordinate phi on (-pi, pi] (periodic).
///
/// Free energies: A_exact = V_phi, A_contract (argument scaled by 1.2),
/// A_biased (+500 cos(phi - 1)). Reconstructions: nu_exact (variances
/// 1/(beta k)), nu_wide (doubled).
Model butane_model(double beta = kButaneDefaultBeta);

// Standalone reconstruction operations; the model catalogs wrap these.
Vec threeatom_reconstruct(ReconVariant variant, double z, double epsilon,
                          double beta, RngEngine& rng);
double threeatom_reconstruction_log_density(ReconVariant variant, const Vec& x,
                                            double z, double epsilon,
                                            double beta);
Vec butane_reconstruct(ReconVariant variant, double phi, double beta,
                       RngEngine& rng);
double butane_reconstruction_log_density(ReconVariant variant, const Vec& x,
                                         double phi, double beta);

}  // namespace mmmcmc
