#include "bcgp/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bcgp/distributions.hpp"

namespace bcgp {

void ChainConfig::validate() const {
  if (!(target_lo > 0.0 && target_lo < target_c && target_c < target_hi && target_hi < 1.0))
    throw std::invalid_argument("ChainConfig: need 0 < target_lo < target_c < target_hi < 1");
  if (n_prop < 1) throw std::invalid_argument("ChainConfig: n_prop must be >= 1");
  if (m < 0) throw std::invalid_argument("ChainConfig: m must be >= 0 (0 = auto)");
  if (n_adapt < 1) throw std::invalid_argument("ChainConfig: n_adapt must be >= 1");
  if (num_updates < 0 || n_burn < 0 || n_mcmc < 0)
    throw std::invalid_argument("ChainConfig: phase lengths must be >= 0");
  if (tau2_proposal < 0.0) throw std::invalid_argument("ChainConfig: tau2_proposal must be >= 0");
  if (small_n_threshold < 0)
    throw std::invalid_argument("ChainConfig: small_n_threshold must be >= 0");
}

ProposalWidths ProposalWidths::initial(Eigen::Index d) {
  ProposalWidths w;
  w.rho_g = Eigen::VectorXd::Constant(d, 0.05);
  w.rho_l = Eigen::VectorXd::Constant(d, 0.05);
  w.rho_v = Eigen::VectorXd::Constant(d, 0.05);
  return w;
}

namespace {

double scalar_of(const ModelState& s, MhParam p, int j) {
  switch (p) {
    case MhParam::Omega: return s.omega;
    case MhParam::RhoG: return s.rho_g[j];
    case MhParam::RhoL: return s.rho_l[j];
    case MhParam::Sigma2Eps: return s.sigma2_eps;
    case MhParam::RhoV: return s.rho_v[j];
  }
  throw std::logic_error("unreachable");
}

void assign_scalar(ModelState& s, MhParam p, int j, double value) {
  switch (p) {
    case MhParam::Omega: s.omega = value; return;
    case MhParam::RhoG: s.rho_g[j] = value; return;
    case MhParam::RhoL: s.rho_l[j] = value; return;
    case MhParam::Sigma2Eps: s.sigma2_eps = value; return;
    case MhParam::RhoV: s.rho_v[j] = value; return;
  }
}

/// Effective focal-block size: local blocks need to be well under n.
int effective_n_prop(const ChainConfig& cfg, Eigen::Index n) {
  return static_cast<int>(std::min<Eigen::Index>(cfg.n_prop, (n + 1) / 2));
}

int auto_m(const ChainConfig& cfg, Eigen::Index n) {
  if (cfg.m > 0) return cfg.m;
  const int p = effective_n_prop(cfg, n);
  return static_cast<int>((2 * n + p - 1) / p);  // m * n_prop > n
}

/// n_prop nearest training rows to a focal point; ties broken by lowest index.
std::vector<Eigen::Index> nearest_indices(const Eigen::MatrixXd& x_scaled,
                                          const Eigen::VectorXd& focal, int n_prop) {
  const Eigen::Index n = x_scaled.rows();
  std::vector<std::pair<double, Eigen::Index>> by_dist(n);
  for (Eigen::Index i = 0; i < n; ++i)
    by_dist[i] = {(x_scaled.row(i).transpose() - focal).squaredNorm(), i};
  std::sort(by_dist.begin(), by_dist.end());
  const auto count = std::min<Eigen::Index>(n_prop, n);
  std::vector<Eigen::Index> out(count);
  for (Eigen::Index k = 0; k < count; ++k) out[k] = by_dist[k].second;
  return out;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

/// Cholesky factor of the conditional correlation of the `bar` block given
/// the `under` block, i.e. of R_bb - R_bu R_uu^{-1} R_ub. Computed as the
/// trailing block of the joint factorization with the conditioning set
/// ordered first: forming the Schur complement explicitly loses definiteness
/// to round-off whenever a proposal point sits next to a conditioning point.
Eigen::MatrixXd conditional_chol(const Eigen::MatrixXd& r_corr,
                                 const std::vector<Eigen::Index>& bar,
                                 const std::vector<Eigen::Index>& under) {
  std::vector<Eigen::Index> order = under;
  order.insert(order.end(), bar.begin(), bar.end());
  const CovMatrix joint = CovMatrix::factor(submatrix(r_corr, order, order));
  const auto p = static_cast<Eigen::Index>(bar.size());
  return joint.cholesky_lower().bottomRightCorner(p, p);
}

}  // namespace

// ---------------------------------------------------------------------------
// From-scratch single-step operations
// ---------------------------------------------------------------------------

double gibbs_beta0(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                   Rng& rng) {
  const CovMatrix c = build_cov_matrix(data.sq_dist(), state, hp);
  const Eigen::VectorXd a = c.solve(Eigen::VectorXd::Ones(data.n()));
  const double precision = a.sum();
  const double mean = a.dot(data.y()) / precision;
  return mean + std::sqrt(1.0 / precision) * rng.normal();
}

double gibbs_mu_v(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                  Rng& rng) {
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), state.rho_v, hp.k_v));
  const Eigen::VectorXd a = r.solve(Eigen::VectorXd::Ones(data.n()));
  const double v = 1.0 / (1.0 / hp.tau2_v + a.sum() / state.sigma2_v);
  const double m = v * (hp.beta_v / hp.tau2_v + a.dot(state.w) / state.sigma2_v);
  return m + std::sqrt(v) * rng.normal();
}

double gibbs_sigma2_v(const ModelState& state, const TrainingSet& data, const HyperParams& hp,
                      Rng& rng) {
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), state.rho_v, hp.k_v));
  const Eigen::VectorXd resid = state.w.array() - state.mu_v;
  const double quad = resid.dot(r.solve(resid));
  const double shape = 0.5 * static_cast<double>(data.n()) + hp.a_sigma2v;
  const double b_new = 1.0 / (0.5 * quad + 1.0 / hp.b_sigma2v);
  return InverseGammaDist(shape, b_new).sample(rng);
}

MhOutcome mh_uniform_step(MhParam param, int dim_index, double width, const ModelState& state,
                          const TrainingSet& data, const HyperParams& hp, Rng& rng) {
  if (!(width > 0.0)) throw std::invalid_argument("mh_uniform_step: width must be > 0");
  const double current = scalar_of(state, param, dim_index);
  const double proposed = rng.uniform(current - width, current + width);
  ModelState trial = state;
  assign_scalar(trial, param, dim_index, proposed);
  double log_ratio = kNegInf;
  if (trial.in_support(hp))
    log_ratio = log_posterior(trial, data, hp) - log_posterior(state, data, hp);
  const double u = rng.uniform();
  if (std::log(u) < log_ratio) return {proposed, true};
  return {current, false};
}

Eigen::VectorXd update_v_small(const ModelState& state, const TrainingSet& data,
                               const HyperParams& hp, const ChainConfig& cfg, Rng& rng) {
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), state.rho_v, hp.k_v));
  // Proposal scale rides on the current latent-prior scale so the step size
  // stays meaningful whatever value sigma2_V has drifted to.
  const double tau = std::sqrt(cfg.tau2_proposal * state.sigma2_v);
  Eigen::VectorXd z(data.n());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd w_prop = state.w + tau * (r.cholesky_lower() * z);
  ModelState trial = state;
  trial.w = w_prop;
  const double log_lik_ratio = log_likelihood(trial, data, hp) - log_likelihood(state, data, hp);
  const double log_prior_ratio =
      log_latent_density_given(r, w_prop, state.mu_v, state.sigma2_v) -
      log_latent_density_given(r, state.w, state.mu_v, state.sigma2_v);
  const double u = rng.uniform();
  if (std::log(u) < log_lik_ratio + log_prior_ratio) return w_prop;
  return state.w;
}

Eigen::VectorXd update_v_clustered(const ModelState& state, const TrainingSet& data,
                                   const HyperParams& hp, const ChainConfig& cfg, Rng& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const Eigen::MatrixXd r_corr = corr_matrix(data.sq_dist(), state.rho_v, hp.k_v);
  const CovMatrix r = CovMatrix::factor(r_corr);
  const double tau = std::sqrt(cfg.tau2_proposal * state.sigma2_v);
  ModelState current = state;
  double cur_loglik = log_likelihood(current, data, hp);
  double cur_latent = log_latent_density_given(r, current.w, state.mu_v, state.sigma2_v);
  const int repeats =
      cfg.m > 0 ? cfg.m : static_cast<int>((2 * n + cfg.n_prop - 1) / cfg.n_prop);
  for (int cycle = 0; cycle < repeats; ++cycle) {
    Eigen::VectorXd focal(d);
    for (Eigen::Index j = 0; j < d; ++j) focal[j] = rng.uniform();
    const std::vector<Eigen::Index> bar = nearest_indices(data.x_scaled(), focal, cfg.n_prop);
    std::vector<char> in_bar(n, 0);
    for (auto i : bar) in_bar[i] = 1;
    std::vector<Eigen::Index> under;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!in_bar[i]) under.push_back(i);

    const Eigen::MatrixXd cond_chol = conditional_chol(r_corr, bar, under);
    Eigen::VectorXd z(static_cast<Eigen::Index>(bar.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Eigen::VectorXd step = tau * (cond_chol * z);

    ModelState trial = current;
    for (std::size_t k = 0; k < bar.size(); ++k) trial.w[bar[k]] += step[k];
    const double trial_loglik = log_likelihood(trial, data, hp);
    const double trial_latent =
        log_latent_density_given(r, trial.w, state.mu_v, state.sigma2_v);
    const double u = rng.uniform();
    if (std::log(u) < (trial_loglik - cur_loglik) + (trial_latent - cur_latent)) {
      current = std::move(trial);
      cur_loglik = trial_loglik;
      cur_latent = trial_latent;
    }
  }
  return current.w;
}

ProposalWidths calibrate_widths(const ProposalWidths& widths,
                                const std::vector<AcceptanceRecord>& counts,
                                const ChainConfig& cfg) {
  ProposalWidths out = widths;
  auto adjusted = [&](double width, const AcceptanceRecord& rec) {
    if (rec.proposals == 0) return width;
    const double rate = rec.rate();
    if (rate >= cfg.target_lo && rate <= cfg.target_hi) return width;
    if (rec.accepts == 0) return width * 0.3;  // rate/c would zero the width for good
    return width * rate / cfg.target_c;
  };
  const Eigen::Index d = widths.rho_g.size();
  std::size_t idx = 0;
  out.omega = adjusted(widths.omega, counts.at(idx++));
  for (Eigen::Index j = 0; j < d; ++j) out.rho_g[j] = adjusted(widths.rho_g[j], counts.at(idx++));
  for (Eigen::Index j = 0; j < d; ++j) out.rho_l[j] = adjusted(widths.rho_l[j], counts.at(idx++));
  out.sigma2_eps = adjusted(widths.sigma2_eps, counts.at(idx++));
  for (Eigen::Index j = 0; j < d; ++j) out.rho_v[j] = adjusted(widths.rho_v[j], counts.at(idx++));
  return out;
}

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

Sampler::Sampler(const TrainingSet& data, const HyperParams& hp, const ChainConfig& cfg,
                 ModelState init)
    : data_(data),
      hp_(hp),
      cfg_(cfg),
      state_(std::move(init)),
      widths_(ProposalWidths::initial(data.d())),
      rng_(cfg.seed),
      m_updates_(auto_m(cfg, data.n())) {
  cfg_.validate();
  hp_.validate();
  if (log_prior_static(state_, hp_) == kNegInf)
    throw std::invalid_argument("Sampler: initial state has zero posterior density");
  r_ = CovMatrix::factor(corr_matrix(data_.sq_dist(), state_.rho_v, hp_.k_v));
  latent_ = log_latent_density_given(r_, state_.w, state_.mu_v, state_.sigma2_v);
  if (!cfg_.prior_only) {
    c_ = build_cov_matrix(data_.sq_dist(), state_, hp_);
    loglik_ = log_likelihood_given(c_, state_.beta0, data_.y());
  }

  const Eigen::Index d = data_.d();
  counters_.push_back({"omega"});
  for (Eigen::Index j = 0; j < d; ++j)
    counters_.push_back({"rho_g[" + std::to_string(j) + "]"});
  for (Eigen::Index j = 0; j < d; ++j)
    counters_.push_back({"rho_l[" + std::to_string(j) + "]"});
  counters_.push_back({"sigma2_eps"});
  for (Eigen::Index j = 0; j < d; ++j)
    counters_.push_back({"rho_v[" + std::to_string(j) + "]"});
  counters_.push_back({"v"});
  v_counter_idx_ = counters_.size() - 1;
}

void Sampler::reset_counters() {
  for (auto& c : counters_) c.proposals = c.accepts = 0;
}

void Sampler::adapt_widths() { widths_ = calibrate_widths(widths_, counters_, cfg_); }

double Sampler::loglik_of(const CovMatrix& c, double beta0) const {
  return log_likelihood_given(c, beta0, data_.y());
}

void Sampler::mh_step(MhParam param, int dim_index, std::size_t counter_idx) {
  const double current = scalar_of(state_, param, dim_index);
  double width = 0.0;
  switch (param) {
    case MhParam::Omega: width = widths_.omega; break;
    case MhParam::RhoG: width = widths_.rho_g[dim_index]; break;
    case MhParam::RhoL: width = widths_.rho_l[dim_index]; break;
    case MhParam::Sigma2Eps: width = widths_.sigma2_eps; break;
    case MhParam::RhoV: width = widths_.rho_v[dim_index]; break;
  }
  const double proposed = rng_.uniform(current - width, current + width);
  counters_[counter_idx].proposals++;

  double log_ratio = kNegInf;
  CovMatrix new_c, new_r;
  double new_loglik = loglik_;
  double new_latent = latent_;
  bool touches_c = false, touches_r = false;

  ModelState trial = state_;
  assign_scalar(trial, param, dim_index, proposed);
  if (trial.in_support(hp_)) {
    double prior_delta = 0.0;
    switch (param) {
      case MhParam::Omega: {
        const TruncatedBeta pr(hp_.alpha_omega, hp_.beta_omega, hp_.l_omega, hp_.u_omega);
        prior_delta = pr.logpdf(proposed) - pr.logpdf(current);
        touches_c = true;
        break;
      }
      case MhParam::RhoG: {
        const BetaDist pr(hp_.alpha_g, hp_.beta_g);
        const double rho_l_j = state_.rho_l[dim_index];
        prior_delta = pr.logpdf(proposed) - pr.logpdf(current) +
                      TruncatedBeta(hp_.alpha_l, hp_.beta_l, 0.0, proposed).logpdf(rho_l_j) -
                      TruncatedBeta(hp_.alpha_l, hp_.beta_l, 0.0, current).logpdf(rho_l_j);
        touches_c = true;
        break;
      }
      case MhParam::RhoL: {
        const TruncatedBeta pr(hp_.alpha_l, hp_.beta_l, 0.0, state_.rho_g[dim_index]);
        prior_delta = pr.logpdf(proposed) - pr.logpdf(current);
        touches_c = true;
        break;
      }
      case MhParam::Sigma2Eps: {
        const GammaDist pr(hp_.a_eps, hp_.b_eps);
        prior_delta = pr.logpdf(proposed) - pr.logpdf(current);
        touches_c = true;
        break;
      }
      case MhParam::RhoV: {
        const BetaDist pr(hp_.alpha_rhov, hp_.beta_rhov);
        prior_delta = pr.logpdf(proposed) - pr.logpdf(current);
        touches_r = true;
        break;
      }
    }
    if (touches_c && !cfg_.prior_only) {
      new_c = build_cov_matrix(data_.sq_dist(), trial, hp_);
      new_loglik = loglik_of(new_c, state_.beta0);
    }
    if (touches_r) {
      new_r = CovMatrix::factor(corr_matrix(data_.sq_dist(), trial.rho_v, hp_.k_v));
      new_latent = log_latent_density_given(new_r, state_.w, state_.mu_v, state_.sigma2_v);
    }
    log_ratio = (new_loglik - loglik_) + (new_latent - latent_) + prior_delta;
  }

  const double u = rng_.uniform();
  if (std::log(u) < log_ratio) {
    assign_scalar(state_, param, dim_index, proposed);
    if (touches_c && !cfg_.prior_only) {
      c_ = std::move(new_c);
      loglik_ = new_loglik;
    }
    if (touches_r) {
      r_ = std::move(new_r);
      latent_ = new_latent;
    }
    counters_[counter_idx].accepts++;
  }
}

void Sampler::update_v() {
  const Eigen::Index n = data_.n();
  const double tau = std::sqrt(cfg_.tau2_proposal * state_.sigma2_v);
  const bool small = n < cfg_.small_n_threshold;
  const int repeats = small ? 1 : m_updates_;
  // Slice from the unjittered correlation; the factored r_ carries at most a
  // 1e-6-scale diagonal perturbation.
  Eigen::MatrixXd r_corr;
  if (!small) r_corr = corr_matrix(data_.sq_dist(), state_.rho_v, hp_.k_v);

  for (int cycle = 0; cycle < repeats; ++cycle) {
    std::vector<Eigen::Index> bar;
    Eigen::MatrixXd proposal_chol;
    if (small) {
      bar.resize(n);
      std::iota(bar.begin(), bar.end(), 0);
      proposal_chol = r_.cholesky_lower();
    } else {
      Eigen::VectorXd focal(data_.d());
      for (Eigen::Index j = 0; j < data_.d(); ++j) focal[j] = rng_.uniform();
      bar = nearest_indices(data_.x_scaled(), focal, effective_n_prop(cfg_, n));
      std::vector<char> in_bar(n, 0);
      for (auto i : bar) in_bar[i] = 1;
      std::vector<Eigen::Index> under;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!in_bar[i]) under.push_back(i);
      proposal_chol = conditional_chol(r_corr, bar, under);
    }

    Eigen::VectorXd z(static_cast<Eigen::Index>(bar.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng_.normal();
    const Eigen::VectorXd step = tau * (proposal_chol * z);

    ModelState trial = state_;
    for (std::size_t k = 0; k < bar.size(); ++k) trial.w[bar[k]] += step[k];

    counters_[v_counter_idx_].proposals++;
    double new_loglik = loglik_;
    CovMatrix new_c;
    if (!cfg_.prior_only) {
      new_c = build_cov_matrix(data_.sq_dist(), trial, hp_);
      new_loglik = loglik_of(new_c, state_.beta0);
    }
    const double new_latent =
        log_latent_density_given(r_, trial.w, state_.mu_v, state_.sigma2_v);
    const double log_ratio = (new_loglik - loglik_) + (new_latent - latent_);
    const double u = rng_.uniform();
    if (std::log(u) < log_ratio) {
      state_.w = trial.w;
      if (!cfg_.prior_only) {
        c_ = std::move(new_c);
        loglik_ = new_loglik;
      }
      latent_ = new_latent;
      counters_[v_counter_idx_].accepts++;
    }
  }
}

void Sampler::iterate() {
  const Eigen::Index n = data_.n();
  const Eigen::Index d = data_.d();

  // Step 1: beta0 from its full conditional. With the flat prior this
  // conditional is improper without the likelihood, so it is frozen in
  // prior-only runs.
  if (!cfg_.prior_only) {
    const Eigen::VectorXd a = c_.solve(Eigen::VectorXd::Ones(n));
    const double precision = a.sum();
    const double mean = a.dot(data_.y()) / precision;
    state_.beta0 = mean + std::sqrt(1.0 / precision) * rng_.normal();
    loglik_ = loglik_of(c_, state_.beta0);
  }

  // Steps 2-5: omega, rho_G, rho_L, sigma2_eps by uniform-window Metropolis.
  std::size_t idx = 0;
  mh_step(MhParam::Omega, 0, idx++);
  for (Eigen::Index j = 0; j < d; ++j) mh_step(MhParam::RhoG, static_cast<int>(j), idx++);
  for (Eigen::Index j = 0; j < d; ++j) mh_step(MhParam::RhoL, static_cast<int>(j), idx++);
  if (hp_.include_nugget)
    mh_step(MhParam::Sigma2Eps, 0, idx);
  idx++;

  // Step 6: mu_V from its full conditional.
  {
    const Eigen::VectorXd a = r_.solve(Eigen::VectorXd::Ones(n));
    const double v = 1.0 / (1.0 / hp_.tau2_v + a.sum() / state_.sigma2_v);
    const double m = v * (hp_.beta_v / hp_.tau2_v + a.dot(state_.w) / state_.sigma2_v);
    state_.mu_v = m + std::sqrt(v) * rng_.normal();
  }

  // Step 7: sigma2_V from its full conditional.
  {
    const Eigen::VectorXd resid = state_.w.array() - state_.mu_v;
    const double quad = resid.dot(r_.solve(resid));
    const double shape = 0.5 * static_cast<double>(n) + hp_.a_sigma2v;
    const double b_new = 1.0 / (0.5 * quad + 1.0 / hp_.b_sigma2v);
    state_.sigma2_v = InverseGammaDist(shape, b_new).sample(rng_);
    latent_ = log_latent_density_given(r_, state_.w, state_.mu_v, state_.sigma2_v);
  }

  // Step 8: rho_V one-at-a-time.
  for (Eigen::Index j = 0; j < d; ++j) mh_step(MhParam::RhoV, static_cast<int>(j), idx++);

  // Step 9: latent variance process.
  update_v();
}

ChainOutput run_chain(const TrainingSet& data, const HyperParams& hp, const ChainConfig& cfg,
                      std::optional<ModelState> init) {
  ModelState start = init ? *init : ModelState::initial_from_data(data, hp);
  Sampler sampler(data, hp, cfg, std::move(start));

  ChainOutput out;
  auto accumulate = [](std::vector<AcceptanceRecord>& total,
                       const std::vector<AcceptanceRecord>& period) {
    if (total.empty()) total = period;
    else
      for (std::size_t i = 0; i < total.size(); ++i) {
        total[i].proposals += period[i].proposals;
        total[i].accepts += period[i].accepts;
      }
  };

  for (int period = 0; period < cfg.num_updates; ++period) {
    for (int it = 0; it < cfg.n_adapt; ++it) sampler.iterate();
    accumulate(out.calibration_acceptance, sampler.counters());
    sampler.adapt_widths();
    sampler.reset_counters();
  }

  for (int it = 0; it < cfg.n_burn; ++it) sampler.iterate();
  out.burnin_acceptance = sampler.counters();
  sampler.reset_counters();

  out.states.reserve(cfg.n_mcmc);
  for (int it = 0; it < cfg.n_mcmc; ++it) {
    sampler.iterate();
    out.states.push_back(sampler.state());
  }
  out.production_acceptance = sampler.counters();
  out.final_widths = sampler.widths();
  out.final_state = sampler.state();
  return out;
}

}  // namespace bcgp
