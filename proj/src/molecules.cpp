#include "mmmcmc/molecules.hpp"

#include <cmath>
#include <numbers>

namespace mmmcmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Three-atom constants: quartic angle term 104 ((z-pi/2)^2 - d^2)^2.
constexpr double kAngleCoeff = 208.0 / 2.0;
constexpr double kWellOffset = 0.3838;
constexpr double kShiftedWellOffset = 0.4838;

double quartic_well(double z, double offset) {
  const double d = z - kPi / 2.0;
  const double t = d * d - offset * offset;
  return kAngleCoeff * t * t;
}

double quartic_well_grad(double z, double offset) {
  const double d = z - kPi / 2.0;
  const double t = d * d - offset * offset;
  return 4.0 * kAngleCoeff * t * d;
}

double threeatom_A_exact(double z) { return quartic_well(z, kWellOffset); }

double gauss_log_pdf(double v, double mean, double var) {
  const double d = v - mean;
  return -0.5 * std::log(kTwoPi * var) - d * d / (2.0 * var);
}

double positive_normal(double mean, double stddev, RngEngine& rng) {
  std::normal_distribution<double> normal(mean, stddev);
  // Draws at or below zero carry no usable geometry; resample for totality.
  for (;;) {
    const double v = normal(rng);
    if (v > 0.0) return v;
  }
}

void check_fiber(double rc_of_x, double z, const RcDomain& domain) {
  if (std::abs(domain.signed_diff(rc_of_x, z)) > 1e-9)
    throw std::invalid_argument(
        "reconstruction log-density: state is not on the fiber of z");
}

const ButaneParams kButane{};

}  // namespace

double butane_torsion_potential(double phi) {
  const double c = std::cos(phi);
  return kButane.c0 + c * (kButane.c1 + c * (kButane.c2 + c * kButane.c3));
}

Vec threeatom_reconstruct(ReconVariant variant, double z, double epsilon,
                          double beta, RngEngine& rng) {
  const double var =
      (variant == ReconVariant::wide ? 2.0 : 1.0) * epsilon / beta;
  const double sd = std::sqrt(var);
  std::normal_distribution<double> normal(1.0, sd);
  const double xa = normal(rng);
  const double rc = positive_normal(1.0, sd, rng);
  return {xa, rc * std::cos(z), rc * std::sin(z)};
}

double threeatom_reconstruction_log_density(ReconVariant variant, const Vec& x,
                                            double z, double epsilon,
                                            double beta) {
  const double rc = std::hypot(x[1], x[2]);
  check_fiber(std::atan2(x[2], x[1]), z, RcDomain{0.0, kPi, false});
  const double var =
      (variant == ReconVariant::wide ? 2.0 : 1.0) * epsilon / beta;
  return gauss_log_pdf(x[0], 1.0, var) + gauss_log_pdf(rc, 1.0, var);
}

Vec butane_reconstruct(ReconVariant variant, double phi, double beta,
                       RngEngine& rng) {
  const double scale = variant == ReconVariant::wide ? 2.0 : 1.0;
  const double sd_r = std::sqrt(scale / (beta * kButane.k_b));
  const double sd_a = std::sqrt(scale / (beta * kButane.k_a));
  std::normal_distribution<double> bend(kButane.theta0, sd_a);
  Vec x(6);
  for (int i = 0; i < 3; ++i) x[i] = positive_normal(kButane.r0, sd_r, rng);
  for (int i = 3; i < 5; ++i) x[i] = bend(rng);
  x[5] = phi;
  return x;
}

double butane_reconstruction_log_density(ReconVariant variant, const Vec& x,
                                         double phi, double beta) {
  check_fiber(x[5], phi, RcDomain{-kPi, kPi, true});
  const double scale = variant == ReconVariant::wide ? 2.0 : 1.0;
  const double var_r = scale / (beta * kButane.k_b);
  const double var_a = scale / (beta * kButane.k_a);
  double lp = 0.0;
  for (int i = 0; i < 3; ++i) lp += gauss_log_pdf(x[i], kButane.r0, var_r);
  for (int i = 3; i < 5; ++i) lp += gauss_log_pdf(x[i], kButane.theta0, var_a);
  return lp;
}

Model three_atom_model(double epsilon, double beta) {
  if (epsilon <= 0.0) throw ConfigError("threeatom: epsilon must be positive");
  if (beta <= 0.0) throw ConfigError("threeatom: beta must be positive");

  Model m;
  m.id = "threeatom";
  m.dim = 3;
  m.epsilon = epsilon;
  m.beta = beta;
  m.rc_domain = RcDomain{0.0, kPi, false};

  m.potential = [epsilon](const Vec& x) {
    const double rc = std::hypot(x[1], x[2]);
    if (rc == 0.0) return std::numeric_limits<double>::infinity();
    const double theta = std::atan2(x[2], x[1]);
    const double ba = x[0] - 1.0;
    const double bc = rc - 1.0;
    return (ba * ba + bc * bc) / (2.0 * epsilon) + threeatom_A_exact(theta);
  };
  m.potential_gradient = [epsilon](const Vec& x) {
    const double rc = std::hypot(x[1], x[2]);
    const double theta = std::atan2(x[2], x[1]);
    const double rc2 = rc * rc;
    const double dA = quartic_well_grad(theta, kWellOffset);
    const double radial = (rc - 1.0) / (epsilon * rc);
    Vec g(3);
    g[0] = (x[0] - 1.0) / epsilon;
    g[1] = radial * x[1] + dA * (-x[2] / rc2);
    g[2] = radial * x[2] + dA * (x[1] / rc2);
    return g;
  };
  m.rc = [](const Vec& x) { return std::atan2(x[2], x[1]); };
  m.rc_gradient = [](const Vec& x) {
    const double rc2 = x[1] * x[1] + x[2] * x[2];
    return Vec{0.0, -x[2] / rc2, x[1] / rc2};
  };

  const RcDomain dom = m.rc_domain;
  m.free_energies["A_exact"] = FreeEnergy{
      "A_exact", dom, [](double z) { return threeatom_A_exact(z); },
      [](double z) { return quartic_well_grad(z, kWellOffset); }};
  m.free_energies["A_shift"] = FreeEnergy{
      "A_shift", dom, [](double z) { return quartic_well(z, kShiftedWellOffset); },
      [](double z) { return quartic_well_grad(z, kShiftedWellOffset); }};
  m.free_energies["A_cos"] = FreeEnergy{
      "A_cos", dom,
      [](double z) { return threeatom_A_exact(z) + std::cos(z); },
      [](double z) {
        return quartic_well_grad(z, kWellOffset) - std::sin(z);
      }};

  auto make_recon = [epsilon, beta](ReconVariant variant, std::string name) {
    return Reconstruction{
        std::move(name),
        [variant, epsilon, beta](double z, RngEngine& rng) {
          return threeatom_reconstruct(variant, z, epsilon, beta, rng);
        },
        [variant, epsilon, beta](const Vec& x, double z) {
          return threeatom_reconstruction_log_density(variant, x, z, epsilon,
                                                      beta);
        }};
  };
  m.reconstructions["nu_exact"] = make_recon(ReconVariant::exact, "nu_exact");
  m.reconstructions["nu_wide"] = make_recon(ReconVariant::wide, "nu_wide");

  const double z0 = kPi / 2.0 - kWellOffset;
  m.initial_state = {1.0, std::cos(z0), std::sin(z0)};
  return m;
}

Model butane_model(double beta) {
  if (beta <= 0.0) throw ConfigError("butane: beta must be positive");

  Model m;
  m.id = "butane";
  m.dim = 6;
  m.epsilon = 0.0;
  m.beta = beta;
  m.rc_domain = RcDomain{-kPi, kPi, true};
  const RcDomain dom = m.rc_domain;
  const ButaneParams p = kButane;

  m.potential = [p](const Vec& x) {
    double v = butane_torsion_potential(x[5]);
    for (int i = 0; i < 3; ++i) {
      const double d = x[i] - p.r0;
      v += 0.5 * p.k_b * d * d;
    }
    for (int i = 3; i < 5; ++i) {
      const double d = x[i] - p.theta0;
      v += 0.5 * p.k_a * d * d;
    }
    return v;
  };
  m.potential_gradient = [p](const Vec& x) {
    Vec g(6);
    for (int i = 0; i < 3; ++i) g[i] = p.k_b * (x[i] - p.r0);
    for (int i = 3; i < 5; ++i) g[i] = p.k_a * (x[i] - p.theta0);
    const double c = std::cos(x[5]);
    g[5] = -std::sin(x[5]) * (p.c1 + c * (2.0 * p.c2 + 3.0 * p.c3 * c));
    return g;
  };
  m.rc = [](const Vec& x) { return x[5]; };
  m.rc_gradient = [](const Vec&) {
    return Vec{0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  };
  m.normalize_state = [dom](Vec& x) { x[5] = dom.wrap(x[5]); };

  m.free_energies["A_exact"] = FreeEnergy{
      "A_exact", dom, [](double z) { return butane_torsion_potential(z); },
      [p](double z) {
        const double c = std::cos(z);
        return -std::sin(z) * (p.c1 + c * (2.0 * p.c2 + 3.0 * p.c3 * c));
      }};
  // The contracted curve is defined on the principal torsion interval; wrap
  // first so it stays 2 pi periodic (continuous at the seam: even in phi).
  m.free_energies["A_contract"] = FreeEnergy{
      "A_contract", dom,
      [p, dom](double z) {
        const double c = std::cos(1.2 * dom.wrap(z));
        return p.c0 + c * (p.c1 + c * (p.c2 + c * p.c3));
      },
      [p, dom](double z) {
        const double w = 1.2 * dom.wrap(z);
        const double c = std::cos(w);
        return -1.2 * std::sin(w) * (p.c1 + c * (2.0 * p.c2 + 3.0 * p.c3 * c));
      }};
  m.free_energies["A_biased"] = FreeEnergy{
      "A_biased", dom,
      [](double z) {
        return butane_torsion_potential(z) + 500.0 * std::cos(z - 1.0);
      },
      [p](double z) {
        const double c = std::cos(z);
        return -std::sin(z) * (p.c1 + c * (2.0 * p.c2 + 3.0 * p.c3 * c)) -
               500.0 * std::sin(z - 1.0);
      }};

  auto make_recon = [beta](ReconVariant variant, std::string name) {
    return Reconstruction{
        std::move(name),
        [variant, beta](double z, RngEngine& rng) {
          return butane_reconstruct(variant, z, beta, rng);
        },
        [variant, beta](const Vec& x, double z) {
          return butane_reconstruction_log_density(variant, x, z, beta);
        }};
  };
  m.reconstructions["nu_exact"] = make_recon(ReconVariant::exact, "nu_exact");
  m.reconstructions["nu_wide"] = make_recon(ReconVariant::wide, "nu_wide");

  m.initial_state = {p.r0, p.r0, p.r0, p.theta0, p.theta0, -kTwoPi / 3.0};
  return m;
}

}  // namespace mmmcmc
