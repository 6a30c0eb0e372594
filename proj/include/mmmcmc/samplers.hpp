#pragma once

#include <cstddef>

#include "mmmcmc/core.hpp"

namespace mmmcmc {

enum class KernelKind { langevin, brownian };

/// Macroscopic proposal kernel: one Euler-Maruyama step of overdamped
/// Langevin dynamics on a free-energy surface, or plain Brownian motion.
struct ProposalKernel {
  KernelKind kind = KernelKind::brownian;
  double step = 0.0;                  // Delta t
  const FreeEnergy* drift = nullptr;  // required for langevin
  RcDomain domain;
};

struct StepOutcome {
  Vec state;
  bool accepted = false;
  double log_alpha = 0.0;  // min(0, log acceptance ratio)
};

using LogDensity = std::function<double(const Vec&)>;
using LogDensityGradient = std::function<Vec(const Vec&)>;

/// One MALA step targeting exp(logpi) at inverse temperature beta, where
/// logpi already contains beta (for the Gibbs measure, logpi = -beta V).
/// Proposal: x' = x - dt grad V(x) + sqrt(2 dt / beta) eta. Non-finite
/// proposal energies reject.
StepOutcome mala_step(const LogDensity& logpi,
                      const LogDensityGradient& grad_logpi, const Vec& x,
                      double dt, double beta, RngEngine& rng);

struct MacroProposal {
  double z_new = 0.0;  // wrapped into the kernel domain
  double log_q_forward = 0.0;
  double log_q_backward = 0.0;
};

/// Proposes a new reaction-coordinate value. Brownian kernels are symmetric
/// (forward == backward by construction, also after wrapping); Langevin
/// kernels return both Gaussian transition log-densities, evaluated on the
/// unwrapped line before the state is wrapped.
MacroProposal macro_propose(const ProposalKernel& kernel, double z,
                            double beta, RngEngine& rng);

/// log of the Metropolis-Hastings acceptance probability at the macroscopic
/// level. Proposals outside a non-periodic domain get -inf (certain
/// rejection).
double macro_accept_log_prob(const FreeEnergy& mu0_bar, double z, double z_new,
                             double log_q_forward, double log_q_backward,
                             double beta);

struct ChainOptions {
  std::size_t burn_in = 0;
  std::size_t store_stride = 1;
  bool store_states = false;
};

/// One sampler trajectory: stored reaction-coordinate samples (rejected steps
/// store the repeated state), acceptance tallies, and the wall-clock time of
/// the sampling loop only.
struct ChainRecord {
  std::size_t n_steps = 0;
  std::size_t macro_trials = 0;
  std::size_t macro_accepts = 0;
  std::size_t micro_trials = 0;
  std::size_t micro_accepts = 0;
  double seconds = 0.0;
  std::vector<double> rc_samples;
  std::vector<Vec> states;  // filled only when requested

  double macro_rate() const;  // NaN when no trials
  double micro_rate() const;
};

/// Baseline microscopic MALA chain on the model's Gibbs measure.
ChainRecord run_mala_chain(const Model& model, const Vec& x0,
                           std::size_t n_steps, double dt, double beta,
                           RngEngine& rng, const ChainOptions& opts = {});

}  // namespace mmmcmc
