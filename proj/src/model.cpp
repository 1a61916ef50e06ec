#include "bcgp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bcgp/distributions.hpp"

namespace bcgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void HyperParams::validate() const {
  if (!(l_omega >= 0.0 && l_omega < u_omega && u_omega <= 1.0))
    throw std::invalid_argument("HyperParams: need 0 <= L_omega < U_omega <= 1");
  const double shapes[] = {alpha_omega, beta_omega, alpha_g,   beta_g,     alpha_l,
                           beta_l,      a_eps,      b_eps,     tau2_v,     a_sigma2v,
                           b_sigma2v,   alpha_rhov, beta_rhov, k_g,        k_l,
                           k_v};
  for (double s : shapes)
    if (!(s > 0.0)) throw std::invalid_argument("HyperParams: shape/rate/scale values must be > 0");
}

Eigen::VectorXd StandardizeTransform::scale_point(const Eigen::VectorXd& x) const {
  return ((x - input_lo).array() / (input_hi - input_lo).array()).matrix();
}

Eigen::MatrixXd StandardizeTransform::scale_inputs(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = (x.col(j).array() - input_lo[j]) / (input_hi[j] - input_lo[j]);
  return out;
}

StandardizeTransform standardize(const Eigen::VectorXd& y_raw, const Eigen::VectorXd& input_lo,
                                 const Eigen::VectorXd& input_hi) {
  const Eigen::Index n = y_raw.size();
  if (n < 2) throw std::invalid_argument("standardize: need at least two observations");
  for (Eigen::Index j = 0; j < input_lo.size(); ++j)
    if (!(input_lo[j] < input_hi[j]))
      throw std::invalid_argument("standardize: input bounds must satisfy lo < hi");
  StandardizeTransform t;
  t.center = y_raw.mean();
  const double ss = (y_raw.array() - t.center).square().sum();
  t.scale = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(t.scale > 0.0))
    throw std::invalid_argument("standardize: response is constant (zero sample sd)");
  t.input_lo = input_lo;
  t.input_hi = input_hi;
  return t;
}

TrainingSet TrainingSet::create(Eigen::MatrixXd x, Eigen::VectorXd y_raw,
                                std::optional<Eigen::VectorXd> input_lo,
                                std::optional<Eigen::VectorXd> input_hi) {
  if (x.rows() != y_raw.size())
    throw std::invalid_argument("TrainingSet: input and response counts differ");
  TrainingSet out;
  Eigen::VectorXd lo = input_lo ? *input_lo : Eigen::VectorXd(x.colwise().minCoeff());
  Eigen::VectorXd hi = input_hi ? *input_hi : Eigen::VectorXd(x.colwise().maxCoeff());
  // Degenerate columns (single design value) get a unit box around the value.
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (!(lo[j] < hi[j])) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }
  out.transform_ = standardize(y_raw, lo, hi);
  out.x_ = std::move(x);
  out.y_raw_ = std::move(y_raw);
  out.y_ = (out.y_raw_.array() - out.transform_.center) / out.transform_.scale;
  out.x_scaled_ = out.transform_.scale_inputs(out.x_);
  out.sq_dist_ = PairwiseSqDist::from(out.x_scaled_);
  return out;
}

TrainingSet TrainingSet::from_standardized(Eigen::MatrixXd x, Eigen::VectorXd y,
                                           std::optional<Eigen::VectorXd> input_lo,
                                           std::optional<Eigen::VectorXd> input_hi) {
  if (x.rows() != y.size())
    throw std::invalid_argument("TrainingSet: input and response counts differ");
  if (x.rows() < 1) throw std::invalid_argument("TrainingSet: need at least one observation");
  TrainingSet out;
  Eigen::VectorXd lo = input_lo ? *input_lo : Eigen::VectorXd(x.colwise().minCoeff());
  Eigen::VectorXd hi = input_hi ? *input_hi : Eigen::VectorXd(x.colwise().maxCoeff());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (!(lo[j] < hi[j])) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }
  out.transform_.center = 0.0;
  out.transform_.scale = 1.0;
  out.transform_.input_lo = std::move(lo);
  out.transform_.input_hi = std::move(hi);
  out.x_ = std::move(x);
  out.y_raw_ = y;
  out.y_ = std::move(y);
  out.x_scaled_ = out.transform_.scale_inputs(out.x_);
  out.sq_dist_ = PairwiseSqDist::from(out.x_scaled_);
  return out;
}

bool ModelState::in_support(const HyperParams& hp) const {
  if (!(omega >= hp.l_omega && omega <= hp.u_omega)) return false;
  for (Eigen::Index j = 0; j < rho_g.size(); ++j) {
    if (!(rho_g[j] > 0.0 && rho_g[j] < 1.0)) return false;
    if (!(rho_l[j] > 0.0 && rho_l[j] < rho_g[j])) return false;
    if (!(rho_v[j] > 0.0 && rho_v[j] < 1.0)) return false;
  }
  if (hp.include_nugget && !(sigma2_eps > 0.0)) return false;
  if (!hp.include_nugget && sigma2_eps != 0.0) return false;
  if (!(sigma2_v > 0.0)) return false;
  if (!w.allFinite()) return false;
  return true;
}

ModelState ModelState::initial(Eigen::Index n, Eigen::Index d, const HyperParams& hp) {
  ModelState s;
  s.beta0 = 0.0;
  s.omega = TruncatedBeta(hp.alpha_omega, hp.beta_omega, hp.l_omega, hp.u_omega).mean();
  s.rho_g = Eigen::VectorXd::Constant(d, 0.7);
  s.rho_l = Eigen::VectorXd::Constant(d, 0.35);
  s.sigma2_eps = hp.include_nugget ? hp.a_eps * hp.b_eps : 0.0;
  s.w = Eigen::VectorXd::Zero(n);  // V = 1, matching unit-variance scaling
  s.mu_v = hp.beta_v;
  s.sigma2_v = InverseGammaDist(hp.a_sigma2v, hp.b_sigma2v).mean();
  s.rho_v = Eigen::VectorXd::Constant(d, 0.8);
  return s;
}

ModelState ModelState::initial_from_data(const TrainingSet& data, const HyperParams& hp) {
  const Eigen::Index n = data.n();
  ModelState s = initial(n, data.d(), hp);
  if (n < 5) return s;

  // Raw local-variance field: squared residual of each response against the
  // mean of its two nearest neighbors, averaged over the three nearest raw
  // values, floored and normalized to mean one on the standardized scale.
  Eigen::VectorXd raw(n);
  std::vector<std::pair<double, Eigen::Index>> order(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      order[j] = {(data.x_scaled().row(i) - data.x_scaled().row(j)).squaredNorm(), j};
    std::sort(order.begin(), order.end());
    const double neighbor_mean =
        0.5 * (data.y()[order[1].second] + data.y()[order[2].second]);
    raw[i] = (data.y()[i] - neighbor_mean) * (data.y()[i] - neighbor_mean);
  }
  Eigen::VectorXd smooth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      order[j] = {(data.x_scaled().row(i) - data.x_scaled().row(j)).squaredNorm(), j};
    std::sort(order.begin(), order.end());
    smooth[i] =
        (raw[order[0].second] + raw[order[1].second] + raw[order[2].second]) / 3.0;
  }
  smooth = smooth.cwiseMax(1e-3);
  smooth *= static_cast<double>(n) / smooth.sum();
  const Eigen::VectorXd w_raw = smooth.array().log();

  // Project onto the latent process so the field is plausible under its own
  // prior smoothness: posterior mean of the GP given w_raw with noise kappa.
  const Eigen::MatrixXd r = corr_matrix(data.sq_dist(), s.rho_v, hp.k_v);
  const double kappa = 0.5;
  Eigen::MatrixXd r_noisy = r;
  r_noisy.diagonal().array() += kappa;
  const CovMatrix smoother = CovMatrix::factor(std::move(r_noisy));
  const double level = w_raw.mean();
  s.w = Eigen::VectorXd::Constant(n, level) +
        r * smoother.solve((w_raw.array() - level).matrix().eval());

  s.mu_v = s.w.mean();
  const CovMatrix r_t = CovMatrix::factor(r);
  const Eigen::VectorXd resid = (s.w.array() - s.mu_v).matrix();
  s.sigma2_v = std::max(0.05, resid.dot(r_t.solve(resid)) / static_cast<double>(n));
  return s;
}

double log_likelihood_given(const CovMatrix& c, double beta0, const Eigen::VectorXd& y) {
  const Eigen::VectorXd resid = y.array() - beta0;
  const double quad = resid.dot(c.solve(resid));
  return -0.5 * (static_cast<double>(y.size()) * kLog2Pi + c.logdet() + quad);
}

double log_latent_density_given(const CovMatrix& r_corr, const Eigen::VectorXd& w, double mu_v,
                                double sigma2_v) {
  const Eigen::VectorXd resid = w.array() - mu_v;
  const double quad = resid.dot(r_corr.solve(resid));
  const double n = static_cast<double>(w.size());
  return -0.5 * (n * kLog2Pi + n * std::log(sigma2_v) + r_corr.logdet() + quad / sigma2_v);
}

double log_likelihood(const ModelState& state, const TrainingSet& data, const HyperParams& hp) {
  const CovMatrix c = build_cov_matrix(data.sq_dist(), state, hp);
  return log_likelihood_given(c, state.beta0, data.y());
}

double log_latent_variance_density(const ModelState& state, const TrainingSet& data,
                                   const HyperParams& hp) {
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), state.rho_v, hp.k_v));
  return log_latent_density_given(r, state.w, state.mu_v, state.sigma2_v);
}

double log_prior_static(const ModelState& state, const HyperParams& hp) {
  if (!state.in_support(hp)) return kNegInf;
  double lp = 0.0;  // flat prior on beta0
  lp += TruncatedBeta(hp.alpha_omega, hp.beta_omega, hp.l_omega, hp.u_omega).logpdf(state.omega);
  const BetaDist rho_g_prior(hp.alpha_g, hp.beta_g);
  const BetaDist rho_v_prior(hp.alpha_rhov, hp.beta_rhov);
  for (Eigen::Index j = 0; j < state.rho_g.size(); ++j) {
    lp += rho_g_prior.logpdf(state.rho_g[j]);
    lp += TruncatedBeta(hp.alpha_l, hp.beta_l, 0.0, state.rho_g[j]).logpdf(state.rho_l[j]);
    lp += rho_v_prior.logpdf(state.rho_v[j]);
  }
  if (hp.include_nugget) lp += GammaDist(hp.a_eps, hp.b_eps).logpdf(state.sigma2_eps);
  lp += NormalDist(hp.beta_v, hp.tau2_v).logpdf(state.mu_v);
  lp += InverseGammaDist(hp.a_sigma2v, hp.b_sigma2v).logpdf(state.sigma2_v);
  return lp;
}

double log_prior(const ModelState& state, const TrainingSet& data, const HyperParams& hp) {
  const double lp = log_prior_static(state, hp);
  if (lp == kNegInf) return kNegInf;
  return lp + log_latent_variance_density(state, data, hp);
}

double log_posterior(const ModelState& state, const TrainingSet& data, const HyperParams& hp) {
  const double lp = log_prior(state, data, hp);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(state, data, hp);
}

}  // namespace bcgp
