#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmmcmc/mm.hpp"
#include "mmmcmc/molecules.hpp"

using namespace mmmcmc;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Vec> random_threeatom_states(const Model& m, int n, RngEngine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double sd = std::sqrt(m.epsilon / m.beta);
  std::vector<Vec> states;
  for (int i = 0; i < n; ++i) {
    const double xa = 1.0 + sd * normal(rng);
    const double rc = std::max(0.3, 1.0 + sd * normal(rng));
    const double th = 0.4 + (kPi - 0.8) * uni(rng);
    states.push_back({xa, rc * std::cos(th), rc * std::sin(th)});
  }
  return states;
}

std::vector<Vec> random_butane_states(const Model& m, int n, RngEngine& rng) {
  const ButaneParams p;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double sd_r = std::sqrt(1.0 / (m.beta * p.k_b));
  const double sd_a = std::sqrt(1.0 / (m.beta * p.k_a));
  std::vector<Vec> states;
  for (int i = 0; i < n; ++i) {
    Vec x(6);
    for (int c = 0; c < 3; ++c) x[c] = p.r0 + sd_r * normal(rng);
    for (int c = 3; c < 5; ++c) x[c] = p.theta0 + sd_a * normal(rng);
    x[5] = -3.0 + 6.0 * uni(rng);
    states.push_back(std::move(x));
  }
  return states;
}
}  // namespace

TEST_CASE("gibbs log density: three-atom examples") {
  const Model m = three_atom_model(1e-4, 1.0);
  const double z0 = kPi / 2.0 - 0.3838;
  CHECK(gibbs_log_density(m, {1.0, std::cos(z0), std::sin(z0)}, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // 104 * 0.3838^4, frozen independently
  CHECK(gibbs_log_density(m, {1.0, 0.0, 1.0}, 1.0) ==
        doctest::Approx(-2.2565929183151744).epsilon(1e-12));
  // degenerate bond r_c = 0 maps to -inf (certain rejection)
  CHECK(gibbs_log_density(m, {1.0, 0.0, 0.0}, 1.0) == kNegInf);
}

TEST_CASE("gibbs log density: butane equilibrium is zero energy") {
  const ButaneParams p;
  const Model m = butane_model();
  const Vec x = {p.r0, p.r0, p.r0, p.theta0, p.theta0, 0.0};
  CHECK(gibbs_log_density(m, x, 7.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("free energy log density examples") {
  const Model m = three_atom_model(1e-4, 1.0);
  const FreeEnergy& a = m.free_energy("A_exact");
  CHECK(free_energy_log_density(a, kPi / 2.0 - 0.3838, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(free_energy_log_density(a, kPi / 2.0, 1.0) ==
        doctest::Approx(-2.2565929183151744).epsilon(1e-12));
  CHECK(free_energy_log_density(a, -0.5, 1.0) == kNegInf);

  const Model b = butane_model();
  CHECK(free_energy_log_density(b.free_energy("A_exact"), 0.0, 3.0) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("analytic gradients match central finite differences") {
  RngEngine rng = make_engine(2024);
  for (const double eps : {1e-3, 1e-4}) {
    const Model m = three_atom_model(eps, 1.0);
    const auto states = random_threeatom_states(m, 100, rng);
    CHECK(max_gradient_error(m.potential, m.potential_gradient, states) < 1e-5);
    CHECK(max_gradient_error([&](const Vec& x) { return m.rc(x); },
                             m.rc_gradient, states) < 1e-5);
  }
  const Model b = butane_model();
  const auto states = random_butane_states(b, 100, rng);
  CHECK(max_gradient_error(b.potential, b.potential_gradient, states) < 1e-5);
  CHECK(max_gradient_error([&](const Vec& x) { return b.rc(x); },
                           b.rc_gradient, states) < 1e-5);
}

TEST_CASE("free-energy gradients match finite differences") {
  const Model m = three_atom_model(1e-4, 1.0);
  const Model b = butane_model();
  for (const Model* model : {&m, &b}) {
    for (const auto& [name, fe] : model->free_energies) {
      double worst = 0.0;
      // interior points only; A_contract has a gradient jump at the seam
      for (int i = 1; i < 60; ++i) {
        const double z = fe.domain.lo + fe.domain.length() * i / 61.0;
        const double h = 1e-6;
        const double fd = (fe.value(z + h) - fe.value(z - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - fe.gradient(z)) /
                                    std::max(1.0, std::abs(fe.gradient(z))));
      }
      INFO(name);
      CHECK(worst < 1e-5);
    }
  }
}

TEST_CASE("on the unit fiber the potential reduces to the free energy") {
  const Model m = three_atom_model(1e-4, 1.0);
  const FreeEnergy& a = m.free_energy("A_exact");
  for (int i = 1; i < 40; ++i) {
    const double th = kPi * i / 40.0;
    const Vec x = {1.0, std::cos(th), std::sin(th)};
    CHECK(gibbs_log_density(m, x, 2.5) ==
          doctest::Approx(free_energy_log_density(a, m.rc(x), 2.5))
              .epsilon(1e-12));
  }
}

TEST_CASE("adding a constant to the potential changes no decision") {
  Model shifted = three_atom_model(1e-4, 1.0);
  const Model base = three_atom_model(1e-4, 1.0);
  auto inner = shifted.potential;
  shifted.potential = [inner](const Vec& x) { return inner(x) + 123.75; };

  DirectConfig cfg;
  cfg.kernel = {KernelKind::langevin, 0.01, &base.free_energy("A_shift"),
                base.rc_domain};
  cfg.mu0_bar = &base.free_energy("A_shift");
  cfg.recon = &base.reconstruction("nu_exact");
  cfg.beta = 1.0;
  DirectConfig cfg_shift = cfg;
  cfg_shift.mu0_bar = &shifted.free_energy("A_shift");
  cfg_shift.recon = &shifted.reconstruction("nu_exact");
  cfg_shift.kernel.drift = &shifted.free_energy("A_shift");

  RngEngine r1 = make_engine(7);
  RngEngine r2 = make_engine(7);
  const ChainRecord a =
      run_direct_chain(base, cfg, base.initial_state, 5000, r1);
  const ChainRecord b =
      run_direct_chain(shifted, cfg_shift, shifted.initial_state, 5000, r2);
  REQUIRE(a.rc_samples.size() == b.rc_samples.size());
  CHECK(a.micro_accepts == b.micro_accepts);
  for (std::size_t i = 0; i < a.rc_samples.size(); ++i)
    REQUIRE(a.rc_samples[i] == b.rc_samples[i]);

  RngEngine r3 = make_engine(8);
  RngEngine r4 = make_engine(8);
  const ChainRecord c =
      run_mala_chain(base, base.initial_state, 3000, 1e-4, 1.0, r3);
  const ChainRecord d =
      run_mala_chain(shifted, shifted.initial_state, 3000, 1e-4, 1.0, r4);
  CHECK(c.micro_accepts == d.micro_accepts);
  for (std::size_t i = 0; i < c.rc_samples.size(); ++i)
    REQUIRE(c.rc_samples[i] == d.rc_samples[i]);
}

TEST_CASE("rc domain wrap and signed_diff") {
  const RcDomain torsion{-kPi, kPi, true};
  CHECK(torsion.wrap(kPi) == doctest::Approx(kPi));
  CHECK(torsion.wrap(-kPi) == doctest::Approx(kPi));
  CHECK(torsion.wrap(kPi + 0.1) == doctest::Approx(-kPi + 0.1));
  CHECK(torsion.wrap(-3.0 * kPi + 0.2) == doctest::Approx(-kPi + 0.2));
  CHECK(torsion.signed_diff(3.0, -3.0) == doctest::Approx(6.0 - 2.0 * kPi));
  CHECK(torsion.signed_diff(-3.0, 3.0) == doctest::Approx(2.0 * kPi - 6.0));
  CHECK(torsion.contains(2.0));

  const RcDomain angle{0.0, kPi, false};
  CHECK(angle.wrap(2.5) == 2.5);
  CHECK(angle.signed_diff(2.5, 0.5) == 2.0);
  CHECK(!angle.contains(-0.1));
  CHECK(!angle.contains(kPi));
  CHECK(angle.contains(1.0));
}

TEST_CASE("catalog lookups fail loudly") {
  const Model m = three_atom_model(1e-4, 1.0);
  CHECK_THROWS_AS((void)m.free_energy("A_missing"), ConfigError);
  CHECK_THROWS_AS((void)m.reconstruction("nu_missing"), ConfigError);
}
