#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmmcmc/molecules.hpp"

using namespace mmmcmc;

namespace {
constexpr double kPi = std::numbers::pi;

// One-sample Kolmogorov-Smirnov against a normal CDF; returns the scaled
// statistic sqrt(n) * D (asymptotic 1% critical value 1.628).
double ks_normal(std::vector<double> samples, double mean, double sd) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf =
        0.5 * std::erfc(-(samples[i] - mean) / (sd * std::sqrt(2.0)));
    d = std::max(d, std::abs(cdf - (i + 1) / n));
    d = std::max(d, std::abs(cdf - i / n));
  }
  return std::sqrt(n) * d;
}
}  // namespace

TEST_CASE("three-atom potential examples") {
  const Model m = three_atom_model(1e-4, 1.0);
  CHECK(m.potential({1.0, 0.0, 1.0}) ==
        doctest::Approx(2.2565929183151744).epsilon(1e-12));
  const double se = std::sqrt(1e-4);
  CHECK(m.potential({1.0 + se, 0.0, 1.0}) - m.potential({1.0, 0.0, 1.0}) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(m.rc({1.0, 1.0, 1.0}) == doctest::Approx(kPi / 4.0));
}

TEST_CASE("three-atom reconstruction lands on the fiber") {
  const Model m = three_atom_model(1e-4, 1.0);
  RngEngine rng = make_engine(3);
  std::uniform_real_distribution<double> uz(0.1, kPi - 0.1);
  for (const char* variant : {"nu_exact", "nu_wide"}) {
    const Reconstruction& nu = m.reconstruction(variant);
    for (int i = 0; i < 10000; ++i) {
      const double z = uz(rng);
      const Vec x = nu.sample(z, rng);
      REQUIRE(std::abs(m.rc(x) - z) < 1e-12);
    }
  }
}

TEST_CASE("butane reconstruction lands on the fiber") {
  const Model m = butane_model();
  RngEngine rng = make_engine(4);
  std::uniform_real_distribution<double> uz(-kPi, kPi);
  for (const char* variant : {"nu_exact", "nu_wide"}) {
    const Reconstruction& nu = m.reconstruction(variant);
    for (int i = 0; i < 10000; ++i) {
      const double z = uz(rng);
      const Vec x = nu.sample(z, rng);
      REQUIRE(x[5] == z);
    }
  }
}

TEST_CASE("reconstruction degenerates to the fiber point as eps -> 0") {
  RngEngine rng = make_engine(5);
  const Vec x = threeatom_reconstruct(ReconVariant::exact, kPi / 2.0, 1e-14,
                                      1.0, rng);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("nu_wide doubles the declared variance") {
  RngEngine rng = make_engine(6);
  const int n = 100000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec x =
        threeatom_reconstruct(ReconVariant::wide, 1.2, 1e-4, 1.0, rng);
    s += x[0];
    ss += x[0] * x[0];
  }
  const double var = ss / n - (s / n) * (s / n);
  CHECK(var == doctest::Approx(2e-4).epsilon(0.03));
}

TEST_CASE("reconstruction marginals match their declared gaussians (KS)") {
  RngEngine rng = make_engine(7);
  const int n = 100000;
  std::vector<double> xa, rc;
  xa.reserve(n);
  rc.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec x =
        threeatom_reconstruct(ReconVariant::exact, 0.9, 1e-4, 1.0, rng);
    xa.push_back(x[0]);
    rc.push_back(std::hypot(x[1], x[2]));
  }
  const double sd = std::sqrt(1e-4);
  CHECK(ks_normal(std::move(xa), 1.0, sd) < 1.628);  // p > 0.01
  CHECK(ks_normal(std::move(rc), 1.0, sd) < 1.628);
}

TEST_CASE("three-atom reconstruction log densities") {
  const Vec on_fiber = {1.0, std::cos(1.3), std::sin(1.3)};
  // peak of the bivariate gaussian with both variances eps/beta
  CHECK(threeatom_reconstruction_log_density(ReconVariant::exact, on_fiber,
                                             1.3, 1e-4, 1.0) ==
        doctest::Approx(7.3724633055668373).epsilon(1e-12));
  CHECK(threeatom_reconstruction_log_density(ReconVariant::wide, on_fiber, 1.3,
                                             1e-4, 1.0) ==
        doctest::Approx(6.6793161250068919).epsilon(1e-12));

  // symmetric offsets have equal density
  const double d = 3e-3;
  const Vec plus = {1.0 + d, (1.0 + d) * std::cos(1.3), (1.0 + d) * std::sin(1.3)};
  const Vec minus = {1.0 - d, (1.0 - d) * std::cos(1.3), (1.0 - d) * std::sin(1.3)};
  CHECK(threeatom_reconstruction_log_density(ReconVariant::exact, plus, 1.3,
                                             1e-4, 1.0) ==
        doctest::Approx(threeatom_reconstruction_log_density(
                            ReconVariant::exact, minus, 1.3, 1e-4, 1.0))
            .epsilon(1e-12));

  // fiber mismatch is a contract violation
  CHECK_THROWS_AS(threeatom_reconstruction_log_density(
                      ReconVariant::exact, on_fiber, 1.4, 1e-4, 1.0),
                  std::invalid_argument);
}

TEST_CASE("butane torsion potential and free energies") {
  const ButaneParams p;
  CHECK(butane_torsion_potential(0.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(butane_torsion_potential(kPi) ==
        doctest::Approx(2379.76).epsilon(1e-12));

  const Model m = butane_model();
  CHECK(m.free_energy("A_exact").value(0.0) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.free_energy("A_contract").value(0.0) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.free_energy("A_biased").value(1.0) ==
        doctest::Approx(butane_torsion_potential(1.0) + 500.0)
            .epsilon(1e-12));

  // all butane free energies are 2 pi periodic
  RngEngine rng = make_engine(8);
  std::uniform_real_distribution<double> uz(-kPi, kPi);
  for (const auto& [name, fe] : m.free_energies) {
    INFO(name);
    for (int i = 0; i < 200; ++i) {
      const double z = uz(rng);
      REQUIRE(fe.value(z + 2.0 * kPi) == doctest::Approx(fe.value(z)).epsilon(1e-9));
      REQUIRE(fe.value(z - 2.0 * kPi) == doctest::Approx(fe.value(z)).epsilon(1e-9));
    }
  }
  // and so is the potential
  const Vec x0 = m.initial_state;
  Vec x1 = x0;
  x1[5] += 2.0 * kPi;
  CHECK(m.potential(x1) == doctest::Approx(m.potential(x0)).epsilon(1e-12));
}

TEST_CASE("butane reconstruction log densities") {
  const ButaneParams p;
  const double beta = kButaneDefaultBeta;
  const Vec eq = {p.r0, p.r0, p.r0, p.theta0, p.theta0, 0.7};
  // sum of the five gaussian peak log densities, frozen independently
  CHECK(butane_reconstruction_log_density(ReconVariant::exact, eq, 0.7, beta) ==
        doctest::Approx(13.147544443221535).epsilon(1e-12));
  CHECK(butane_reconstruction_log_density(ReconVariant::wide, eq, 0.7, beta) ==
        doctest::Approx(13.147544443221535 - 1.7328679513998633)
            .epsilon(1e-12));

  // even quadratic: symmetric bond perturbations have the same density
  Vec plus = eq, minus = eq;
  plus[0] += 2e-4;
  minus[0] -= 2e-4;
  CHECK(butane_reconstruction_log_density(ReconVariant::exact, plus, 0.7, beta) ==
        doctest::Approx(butane_reconstruction_log_density(ReconVariant::exact,
                                                          minus, 0.7, beta))
            .epsilon(1e-12));

  CHECK_THROWS_AS(
      butane_reconstruction_log_density(ReconVariant::exact, eq, 0.6, beta),
      std::invalid_argument);
}

TEST_CASE("model constructors reject bad parameters") {
  CHECK_THROWS_AS(three_atom_model(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(three_atom_model(1e-4, -1.0), ConfigError);
  CHECK_THROWS_AS(butane_model(0.0), ConfigError);
}
