#pragma once

#include "mmmcmc/reference.hpp"
#include "mmmcmc/samplers.hpp"

namespace mmmcmc {

/// mM-MCMC with direct reconstruction: macro proposal, coarse accept/reject,
/// reconstruction on the new fiber, microscopic accept/reject. Handles point
/// into one Model and must not outlive it.
struct DirectConfig {
  ProposalKernel kernel;
  const FreeEnergy* mu0_bar = nullptr;
  const Reconstruction* recon = nullptr;
  double beta = 1.0;
};

struct DirectStepResult {
  Vec state;
  bool macro_accepted = false;
  bool micro_accepted = false;
  double micro_log_alpha = 0.0;  // meaningful only when macro_accepted
};

/// log acceptance ratio of the microscopic stage,
/// log [mu(x') mu0_bar(z) nu(x|z)] - log [mu(x) mu0_bar(z') nu(x'|z')].
double direct_micro_log_alpha(const Model& model, const DirectConfig& cfg,
                              const Vec& x, double z, const Vec& x_new,
                              double z_new);

/// One outer step. Macro rejection short-circuits: no reconstruction and no
/// microscopic potential evaluation happen.
DirectStepResult direct_step(const Model& model, const DirectConfig& cfg,
                             const Vec& x, RngEngine& rng);

/// Extended state (x, z) of the indirect chain; xi(x) need not equal z.
struct ExtendedState {
  Vec x;
  double z = 0.0;
};

struct IndirectConfig {
  ProposalKernel kernel;
  const FreeEnergy* mu0_bar = nullptr;
  double lambda = 0.0;
  int k_steps = 1;
  double inner_dt = 0.0;
  const NLambdaTable* n_lambda = nullptr;
  double beta = 1.0;
  /// Apply the Metropolis correction inside the biased inner chain. The
  /// unadjusted variant is exposed for speed comparisons.
  bool mh_correction = true;
};

/// log acceptance ratio of the indirect microscopic stage,
/// log [mu0_bar(z) N_lambda(z')] - log [mu0_bar(z') N_lambda(z)].
/// Depends on the reaction coordinate only, never on the microstate.
double indirect_micro_log_alpha(const IndirectConfig& cfg, double z,
                                double z_new);

struct IndirectStepResult {
  ExtendedState state;
  bool macro_accepted = false;
  bool micro_accepted = false;
};

IndirectStepResult indirect_step(const Model& model, const IndirectConfig& cfg,
                                 const ExtendedState& s, RngEngine& rng);

/// K MALA steps targeting exp(-beta [V(x) + lambda/2 dist(xi(x), z')^2]),
/// where dist respects the periodicity of the rc domain. Returns x_K.
Vec biased_inner_chain(const Model& model, const Vec& x0, double z_target,
                       double lambda, int k_steps, double inner_dt,
                       double beta, bool mh_correction, RngEngine& rng);

ChainRecord run_direct_chain(const Model& model, const DirectConfig& cfg,
                             const Vec& x0, std::size_t n_steps,
                             RngEngine& rng, const ChainOptions& opts = {});

/// Stored rc samples are xi(x) of the microscopic component.
ChainRecord run_indirect_chain(const Model& model, const IndirectConfig& cfg,
                               const ExtendedState& s0, std::size_t n_steps,
                               RngEngine& rng, const ChainOptions& opts = {});

/// Reaction-coordinate-only Metropolis chain under mu0_bar; no microstates.
ChainRecord run_macro_chain(const ProposalKernel& kernel,
                            const FreeEnergy& mu0_bar, double z0,
                            std::size_t n_steps, double beta, RngEngine& rng,
                            const ChainOptions& opts = {});

}  // namespace mmmcmc
