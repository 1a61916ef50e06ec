#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcgp/model.hpp"
#include "bcgp/rng.hpp"

namespace bcgp {

/// Phase lengths, adaptation settings and proposal-scale constants for one
/// MCMC run. The run protocol is calibration -> burn-in -> production; all
/// calibration and burn-in draws are discarded.
struct ChainConfig {
  int n_adapt = 200;     // iterations per adaptation period
  int num_updates = 60;  // number of adaptation periods
  int n_burn = 1000;
  int n_mcmc = 2000;
  double target_lo = 0.25;  // acceptance window for width calibration
  double target_hi = 0.40;
  double target_c = 0.325;   // scalar target rate in the width update
  // Variance scale of the latent-process proposal, relative to the current
  // sigma2_V (proposal covariance = tau2 * sigma2_V * R).
  double tau2_proposal = 0.1;
  // Cluster size for the focal-point update; capped at ceil(n/2) inside the
  // sampler so blocks stay local on small problems.
  int n_prop = 15;
  int m = 0;  // focal updates per iteration; 0 = ceil(2n/n_prop)
  // Below this the latent vector updates in one block. Locally proposed
  // focal-point blocks both reach and hold heteroscedastic fits that the
  // full-vector proposal walks out of, so the block scheme is preferred for
  // all but the smallest problems.
  int small_n_threshold = 10;
  std::uint64_t seed = 0;
  bool prior_only = false;  // drop the likelihood term (prior-recovery checks)

  void validate() const;
};

/// Per-parameter half-widths of the uniform random-walk proposals.
struct ProposalWidths {
  double omega = 0.05;
  Eigen::VectorXd rho_g;
  Eigen::VectorXd rho_l;
  double sigma2_eps = 1e-4;
  Eigen::VectorXd rho_v;

  static ProposalWidths initial(Eigen::Index d);
};

/// Proposal/accept counts for one named parameter within one phase.
struct AcceptanceRecord {
  std::string name;
  long proposals = 0;
  long accepts = 0;

  double rate() const { return proposals > 0 ? double(accepts) / double(proposals) : 0.0; }
};

struct ChainOutput {
  std::vector<ModelState> states;  // production draws
  std::vector<AcceptanceRecord> calibration_acceptance;
  std::vector<AcceptanceRecord> burnin_acceptance;
  std::vector<AcceptanceRecord> production_acceptance;
  ProposalWidths final_widths;
  ModelState final_state;
};

// ---------------------------------------------------------------------------
// Single-step operations. These build everything they need from scratch; the
// Sampler below implements the same updates against cached factorizations.
// ---------------------------------------------------------------------------

/// Draw beta0 from N((1'C^{-1}1)^{-1} 1'C^{-1}y, (1'C^{-1}1)^{-1}).
double gibbs_beta0(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                   Rng& rng);

/// Draw mu_V from N(m, v), v^{-1} = 1/tau2_V + 1'R^{-1}1/sigma2_V,
/// m = v (beta_V/tau2_V + 1'R^{-1}W/sigma2_V).
double gibbs_mu_v(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                  Rng& rng);

/// Draw sigma2_V from IG(n/2 + a, (0.5 (W-mu1)'R^{-1}(W-mu1) + 1/b)^{-1}).
double gibbs_sigma2_v(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                      Rng& rng);

enum class MhParam { Omega, RhoG, RhoL, Sigma2Eps, RhoV };

struct MhOutcome {
  double value = 0.0;
  bool accepted = false;
};

/// One uniform-window Metropolis step for a scalar parameter (dim_index
/// selects the coordinate of a vector parameter). Proposals outside the prior
/// support are always rejected. Consumes exactly two uniforms.
MhOutcome mh_uniform_step(MhParam param, int dim_index, double width, const ModelState& state,
                          const TrainingSet& data, const HyperParams& hp, Rng& rng);

/// Full-vector Metropolis update of the latent log-variance W: propose
/// W' ~ N(W, tau2 sigma2_V R) with R_ij = G(x_i - x_j | rho_V) and accept
/// with the likelihood ratio times the latent-process prior ratio. Returns
/// the updated W vector (V = exp(W)).
Eigen::VectorXd update_v_small(const ModelState& state, const TrainingSet& data,
                               const HyperParams& hp, const ChainConfig& cfg, Rng& rng);

/// Focal-point block update: m times, draw a focal point in [0,1]^d, select
/// the n_prop nearest training locations, propose W' there from the proposal
/// process conditioned on the remaining current values, and accept/reject
/// the block with the same ratio as update_v_small. Returns the updated W.
Eigen::VectorXd update_v_clustered(const ModelState& state, const TrainingSet& data,
                                   const HyperParams& hp, const ChainConfig& cfg, Rng& rng);

/// Width recalibration: for each parameter whose empirical acceptance rate
/// lies outside [target_lo, target_hi], width *= rate / target_c; a zero rate
/// shrinks the width by a fixed factor of 0.3 instead of zeroing it.
ProposalWidths calibrate_widths(const ProposalWidths& widths,
                                const std::vector<AcceptanceRecord>& counts,
                                const ChainConfig& cfg);

// ---------------------------------------------------------------------------

/// Metropolis-within-Gibbs sampler with cached covariance factorizations.
/// One call to iterate() performs the full step sequence: beta0, omega,
/// rho_G (one-at-a-time), rho_L, sigma2_eps, mu_V, sigma2_V, rho_V, V.
class Sampler {
 public:
  Sampler(const TrainingSet& data, const HyperParams& hp, const ChainConfig& cfg,
          ModelState init);

  void iterate();

  const ModelState& state() const { return state_; }
  const std::vector<AcceptanceRecord>& counters() const { return counters_; }
  ProposalWidths& widths() { return widths_; }
  const ProposalWidths& widths() const { return widths_; }
  Rng& rng() { return rng_; }

  void reset_counters();
  void adapt_widths();  // calibrate_widths on the current counters

 private:
  void mh_step(MhParam param, int dim_index, std::size_t counter_idx);
  void update_v();
  double proposal_log_ratio(MhParam param, int dim_index, double proposed, CovMatrix* new_c,
                            CovMatrix* new_r, double* new_loglik, double* new_latent) const;
  double loglik_of(const CovMatrix& c, double beta0) const;

  const TrainingSet& data_;
  const HyperParams& hp_;
  ChainConfig cfg_;
  ModelState state_;
  ProposalWidths widths_;
  Rng rng_;
  int m_updates_;

  CovMatrix c_;       // covariance of the data process at the current state
  CovMatrix r_;       // latent-process correlation at the current rho_V
  double loglik_ = 0.0;
  double latent_ = 0.0;

  std::vector<AcceptanceRecord> counters_;
  std::size_t v_counter_idx_ = 0;
};

/// Three-phase run: num_updates x n_adapt calibration iterations with width
/// adaptation after each period (samples discarded), then n_burn burn-in
/// iterations from the final state with frozen widths (discarded), then
/// n_mcmc production iterations (stored).
ChainOutput run_chain(const TrainingSet& data, const HyperParams& hp, const ChainConfig& cfg,
                      std::optional<ModelState> init = std::nullopt);

}  // namespace bcgp
