#include "mmmcmc/mm.hpp"

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

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double direct_micro_log_alpha(const Model& model, const DirectConfig& cfg,
                              const Vec& x, double z, const Vec& x_new,
                              double z_new) {
  const double num = gibbs_log_density(model, x_new, cfg.beta) -
                     cfg.beta * cfg.mu0_bar->value(z) +
                     cfg.recon->log_density(x, z);
  const double den = gibbs_log_density(model, x, cfg.beta) -
                     cfg.beta * cfg.mu0_bar->value(z_new) +
                     cfg.recon->log_density(x_new, z_new);
  const double la = num - den;
  if (!std::isfinite(la)) return kNegInf;
  return std::min(0.0, la);
}

DirectStepResult direct_step(const Model& model, const DirectConfig& cfg,
                             const Vec& x, RngEngine& rng) {
  const double z = model.rc(x);
  const MacroProposal prop = macro_propose(cfg.kernel, z, cfg.beta, rng);
  const double log_a_cg =
      macro_accept_log_prob(*cfg.mu0_bar, z, prop.z_new, prop.log_q_forward,
                            prop.log_q_backward, cfg.beta);
  if (!metropolis_accept(log_a_cg, rng)) return {x, false, false, 0.0};

  Vec x_new = cfg.recon->sample(prop.z_new, rng);
  const double la = direct_micro_log_alpha(model, cfg, x, z, x_new, prop.z_new);
  if (metropolis_accept(la, rng)) return {std::move(x_new), true, true, la};
  return {x, true, false, la};
}

double indirect_micro_log_alpha(const IndirectConfig& cfg, double z,
                                double z_new) {
  const double num =
      -cfg.beta * cfg.mu0_bar->value(z) + cfg.n_lambda->log_value(z_new);
  const double den =
      -cfg.beta * cfg.mu0_bar->value(z_new) + cfg.n_lambda->log_value(z);
  const double la = num - den;
  if (!std::isfinite(la)) return kNegInf;
  return std::min(0.0, la);
}

Vec biased_inner_chain(const Model& model, const Vec& x0, double z_target,
                       double lambda, int k_steps, double inner_dt,
                       double beta, bool mh_correction, RngEngine& rng) {
  const RcDomain& dom = model.rc_domain;
  const LogDensity logpi = [&](const Vec& x) {
    const double v = model.potential(x);
    if (!std::isfinite(v)) return kNegInf;
    const double d = dom.signed_diff(model.rc(x), z_target);
    return -beta * (v + 0.5 * lambda * d * d);
  };
  const LogDensityGradient grad = [&](const Vec& x) {
    Vec g = model.potential_gradient(x);
    const Vec gr = model.rc_gradient(x);
    const double d = dom.signed_diff(model.rc(x), z_target);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = -beta * (g[i] + lambda * d * gr[i]);
    return g;
  };

  Vec x = x0;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(2.0 * inner_dt / beta);
  for (int k = 0; k < k_steps; ++k) {
    if (mh_correction) {
      StepOutcome out = mala_step(logpi, grad, x, inner_dt, beta, rng);
      if (out.accepted) x = std::move(out.state);
    } else {
      const Vec g = grad(x);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += (inner_dt / beta) * g[i] + sd * normal(rng);
    }
    if (model.normalize_state) model.normalize_state(x);
  }
  return x;
}

IndirectStepResult indirect_step(const Model& model, const IndirectConfig& cfg,
                                 const ExtendedState& s, RngEngine& rng) {
  const MacroProposal prop = macro_propose(cfg.kernel, s.z, cfg.beta, rng);
  const double log_a_cg =
      macro_accept_log_prob(*cfg.mu0_bar, s.z, prop.z_new, prop.log_q_forward,
                            prop.log_q_backward, cfg.beta);
  if (!metropolis_accept(log_a_cg, rng)) return {s, false, false};

  Vec x_new =
      biased_inner_chain(model, s.x, prop.z_new, cfg.lambda, cfg.k_steps,
                         cfg.inner_dt, cfg.beta, cfg.mh_correction, rng);
  const double la = indirect_micro_log_alpha(cfg, s.z, prop.z_new);
  if (metropolis_accept(la, rng))
    return {{std::move(x_new), prop.z_new}, true, true};
  return {s, true, false};
}

ChainRecord run_direct_chain(const Model& model, const DirectConfig& cfg,
                             const Vec& x0, std::size_t n_steps,
                             RngEngine& rng, const ChainOptions& opts) {
  ChainRecord rec;
  rec.n_steps = n_steps;
  rec.rc_samples.reserve(n_steps / opts.store_stride + 1);

  Vec x = x0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n_steps; ++i) {
    DirectStepResult out = direct_step(model, cfg, x, rng);
    ++rec.macro_trials;
    if (out.macro_accepted) {
      ++rec.macro_accepts;
      ++rec.micro_trials;
      if (out.micro_accepted) {
        ++rec.micro_accepts;
        x = std::move(out.state);
      }
    }
    if (i >= opts.burn_in && (i - opts.burn_in) % opts.store_stride == 0) {
      rec.rc_samples.push_back(model.rc(x));
      if (opts.store_states) rec.states.push_back(x);
    }
  }
  rec.seconds = elapsed_seconds(t0);
  return rec;
}

ChainRecord run_indirect_chain(const Model& model, const IndirectConfig& cfg,
                               const ExtendedState& s0, std::size_t n_steps,
                               RngEngine& rng, const ChainOptions& opts) {
  ChainRecord rec;
  rec.n_steps = n_steps;
  rec.rc_samples.reserve(n_steps / opts.store_stride + 1);

  ExtendedState s = s0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n_steps; ++i) {
    IndirectStepResult out = indirect_step(model, cfg, s, rng);
    ++rec.macro_trials;
    if (out.macro_accepted) {
      ++rec.macro_accepts;
      ++rec.micro_trials;
      if (out.micro_accepted) {
        ++rec.micro_accepts;
        s = std::move(out.state);
      }
    }
    if (i >= opts.burn_in && (i - opts.burn_in) % opts.store_stride == 0) {
      rec.rc_samples.push_back(model.rc(s.x));
      if (opts.store_states) rec.states.push_back(s.x);
    }
  }
  rec.seconds = elapsed_seconds(t0);
  return rec;
}

ChainRecord run_macro_chain(const ProposalKernel& kernel,
                            const FreeEnergy& mu0_bar, double z0,
                            std::size_t n_steps, double beta, RngEngine& rng,
                            const ChainOptions& opts) {
  ChainRecord rec;
  rec.n_steps = n_steps;
  rec.rc_samples.reserve(n_steps / opts.store_stride + 1);

  double z = z0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n_steps; ++i) {
    const MacroProposal prop = macro_propose(kernel, z, beta, rng);
    const double la = macro_accept_log_prob(
        mu0_bar, z, prop.z_new, prop.log_q_forward, prop.log_q_backward, beta);
    ++rec.macro_trials;
    if (metropolis_accept(la, rng)) {
      ++rec.macro_accepts;
      z = prop.z_new;
    }
    if (i >= opts.burn_in && (i - opts.burn_in) % opts.store_stride == 0)
      rec.rc_samples.push_back(z);
  }
  rec.seconds = elapsed_seconds(t0);
  return rec;
}

}  // namespace mmmcmc
