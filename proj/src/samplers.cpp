#include "mmmcmc/samplers.hpp"

#include <chrono>
#include <cmath>

namespace mmmcmc {

namespace {

bool metropolis_accept(double log_alpha, RngEngine& rng) {
  if (log_alpha >= 0.0) return true;
  if (log_alpha == kNegInf) return false;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return std::log(uni(rng)) < log_alpha;
}

}  // namespace

StepOutcome mala_step(const LogDensity& logpi,
                      const LogDensityGradient& grad_logpi, const Vec& x,
                      double dt, double beta, RngEngine& rng) {
  const std::size_t d = x.size();
  const double var = 2.0 * dt / beta;
  const double sd = std::sqrt(var);
  const double drift = dt / beta;  // grad_logpi = -beta grad V

  const double lp_x = logpi(x);
  const Vec g_x = grad_logpi(x);

  std::normal_distribution<double> normal(0.0, 1.0);
  Vec xp(d);
  for (std::size_t i = 0; i < d; ++i)
    xp[i] = x[i] + drift * g_x[i] + sd * normal(rng);

  const double lp_xp = logpi(xp);
  if (!std::isfinite(lp_xp)) return {x, false, kNegInf};

  const Vec g_xp = grad_logpi(xp);
  double log_q_fwd = 0.0;
  double log_q_bwd = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double df = xp[i] - (x[i] + drift * g_x[i]);
    const double db = x[i] - (xp[i] + drift * g_xp[i]);
    log_q_fwd -= df * df;
    log_q_bwd -= db * db;
  }
  log_q_fwd /= 2.0 * var;
  log_q_bwd /= 2.0 * var;

  const double log_alpha =
      std::min(0.0, (lp_xp + log_q_bwd) - (lp_x + log_q_fwd));
  if (metropolis_accept(log_alpha, rng)) return {std::move(xp), true, log_alpha};
  return {x, false, log_alpha};
}

MacroProposal macro_propose(const ProposalKernel& kernel, double z,
                            double beta, RngEngine& rng) {
  const double var = 2.0 * kernel.step / beta;
  const double sd = std::sqrt(var);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (kernel.kind == KernelKind::brownian) {
    const double z_raw = z + sd * normal(rng);
    return {kernel.domain.wrap(z_raw), 0.0, 0.0};
  }

  if (kernel.drift == nullptr)
    throw ConfigError("langevin proposal kernel needs a drift free energy");
  const double mean_fwd = z - kernel.step * kernel.drift->gradient(z);
  const double z_raw = mean_fwd + sd * normal(rng);
  const double df = z_raw - mean_fwd;
  const double mean_bwd = z_raw - kernel.step * kernel.drift->gradient(z_raw);
  const double db = z - mean_bwd;
  return {kernel.domain.wrap(z_raw), -df * df / (2.0 * var),
          -db * db / (2.0 * var)};
}

double macro_accept_log_prob(const FreeEnergy& mu0_bar, double z, double z_new,
                             double log_q_forward, double log_q_backward,
                             double beta) {
  if (!mu0_bar.domain.contains(z_new)) return kNegInf;
  const double num = -beta * mu0_bar.value(z_new) + log_q_backward;
  const double den = -beta * mu0_bar.value(z) + log_q_forward;
  const double la = num - den;
  if (!std::isfinite(la)) return kNegInf;
  return std::min(0.0, la);
}

double ChainRecord::macro_rate() const {
  return macro_trials == 0
             ? kNaN
             : static_cast<double>(macro_accepts) / macro_trials;
}

double ChainRecord::micro_rate() const {
  return micro_trials == 0
             ? kNaN
             : static_cast<double>(micro_accepts) / micro_trials;
}

ChainRecord run_mala_chain(const Model& model, const Vec& x0,
                           std::size_t n_steps, double dt, double beta,
                           RngEngine& rng, const ChainOptions& opts) {
  const LogDensity logpi = [&model, beta](const Vec& x) {
    return gibbs_log_density(model, x, beta);
  };
  const LogDensityGradient grad = [&model, beta](const Vec& x) {
    Vec g = model.potential_gradient(x);
    for (double& v : g) v *= -beta;
    return g;
  };

  ChainRecord rec;
  rec.n_steps = n_steps;
  rec.rc_samples.reserve(n_steps / opts.store_stride + 1);

  Vec x = x0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n_steps; ++i) {
    StepOutcome out = mala_step(logpi, grad, x, dt, beta, rng);
    ++rec.micro_trials;
    if (out.accepted) {
      x = std::move(out.state);
      if (model.normalize_state) model.normalize_state(x);
      ++rec.micro_accepts;
    }
    if (i >= opts.burn_in && (i - opts.burn_in) % opts.store_stride == 0) {
      rec.rc_samples.push_back(model.rc(x));
      if (opts.store_states) rec.states.push_back(x);
    }
  }
  rec.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

}  // namespace mmmcmc
