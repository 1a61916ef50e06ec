#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bcgp/distributions.hpp"
#include "bcgp/model.hpp"
#include "bcgp/rng.hpp"

namespace bcgp::testing {

inline constexpr double kLog2Pi = 1.8378770664093454836;

/// Dense multivariate-normal log density oracle: explicit inverse and
/// determinant, deliberately avoiding the library's Cholesky path.
inline double dense_mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd inv = cov.inverse();
  const double det = cov.determinant();
  const Eigen::VectorXd r = y - mean;
  return -0.5 * (static_cast<double>(y.size()) * kLog2Pi + std::log(det) + r.dot(inv * r));
}

/// Training set over the unit box with the response taken as-is.
inline TrainingSet make_unit_set(const Eigen::MatrixXd& x_in_unit_box,
                                 const Eigen::VectorXd& y) {
  const Eigen::Index d = x_in_unit_box.cols();
  return TrainingSet::from_standardized(x_in_unit_box, y, Eigen::VectorXd::Zero(d),
                                        Eigen::VectorXd::Ones(d));
}

/// Kolmogorov-Smirnov statistic of samples against a CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Critical value at significance alpha (two-sided, asymptotic).
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

/// Draw a full model state from the prior (the latent vector from its GP).
inline ModelState sample_prior_state(const TrainingSet& data, const HyperParams& hp, Rng& rng) {
  const Eigen::Index d = data.d();
  ModelState s;
  s.beta0 = 0.0;  // flat prior; fixed for tests
  s.omega = TruncatedBeta(hp.alpha_omega, hp.beta_omega, hp.l_omega, hp.u_omega).sample(rng);
  s.rho_g.resize(d);
  s.rho_l.resize(d);
  s.rho_v.resize(d);
  const BetaDist rho_g_prior(hp.alpha_g, hp.beta_g);
  const BetaDist rho_v_prior(hp.alpha_rhov, hp.beta_rhov);
  for (Eigen::Index j = 0; j < d; ++j) {
    s.rho_g[j] = rho_g_prior.sample(rng);
    s.rho_l[j] = TruncatedBeta(hp.alpha_l, hp.beta_l, 0.0, s.rho_g[j]).sample(rng);
    s.rho_v[j] = rho_v_prior.sample(rng);
  }
  s.sigma2_eps = hp.include_nugget ? GammaDist(hp.a_eps, hp.b_eps).sample(rng) : 0.0;
  s.mu_v = NormalDist(hp.beta_v, hp.tau2_v).sample(rng);
  s.sigma2_v = InverseGammaDist(hp.a_sigma2v, hp.b_sigma2v).sample(rng);
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), s.rho_v, hp.k_v));
  Eigen::VectorXd z(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) z[i] = rng.normal();
  s.w = Eigen::VectorXd::Constant(data.n(), s.mu_v) +
        std::sqrt(s.sigma2_v) * (r.cholesky_lower() * z);
  return s;
}

}  // namespace bcgp::testing
