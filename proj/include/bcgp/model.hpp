#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bcgp/kernels.hpp"

namespace bcgp {

/// Fixed prior hyperparameters and structural constants. Defaults follow the
/// reference prior for data standardized to zero mean and unit variance.
struct HyperParams {
  // omega ~ TrBeta(alpha_omega, beta_omega; L_omega, U_omega)
  double alpha_omega = 4.0;
  double beta_omega = 6.0;
  double l_omega = 0.5;
  double u_omega = 1.0;
  // rho_G,j ~ Beta(alpha_g, beta_g), shared across dimensions
  double alpha_g = 1.0;
  double beta_g = 0.4;
  // rho_L,j | rho_G,j ~ TrBeta(alpha_l, beta_l; 0, rho_G,j)
  double alpha_l = 1.0;
  double beta_l = 1.0;
  // sigma2_eps ~ Gamma(a_eps, b_eps), mean a_eps*b_eps
  double a_eps = 1.0;
  double b_eps = 1e-3;
  // mu_V ~ N(beta_v, tau2_v)
  double beta_v = -0.1;
  double tau2_v = 0.1;
  // sigma2_V ~ IG(a_sigma2v, b_sigma2v), mean 1/((a-1) b) = 0.01 at defaults
  double a_sigma2v = 2.0 + 0.31622776601683794;          // 2 + sqrt(0.1)
  double b_sigma2v = 100.0 / (1.0 + 0.31622776601683794);  // 100 / (1 + sqrt(0.1))
  // rho_V,j ~ Beta(alpha_rhov, beta_rhov)
  double alpha_rhov = 1.0;
  double beta_rhov = 1.0;
  // correlation scale constants (inputs rescaled to [0,1]^d)
  double k_g = 16.0;
  double k_l = 16.0;
  double k_v = 16.0;
  // include the white-noise error process
  bool include_nugget = true;

  void validate() const;
};

/// Affine transforms between original and internal units: the response is
/// standardized to zero mean / unit sample sd, inputs are rescaled to [0,1]^d.
struct StandardizeTransform {
  double center = 0.0;
  double scale = 1.0;
  Eigen::VectorXd input_lo;
  Eigen::VectorXd input_hi;

  double to_internal(double y_raw) const { return (y_raw - center) / scale; }
  double to_original(double y_std) const { return center + scale * y_std; }
  Eigen::VectorXd scale_point(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& x) const;
};

/// Training inputs and response, in both original and internal units.
class TrainingSet {
 public:
  /// Bounds default to the per-column data range when not supplied.
  static TrainingSet create(Eigen::MatrixXd x, Eigen::VectorXd y_raw,
                            std::optional<Eigen::VectorXd> input_lo = std::nullopt,
                            std::optional<Eigen::VectorXd> input_hi = std::nullopt);

  /// Response taken as already standardized (identity transform, any n >= 1).
  /// Used by simulation studies and density checks that need exact control
  /// of the internal response.
  static TrainingSet from_standardized(Eigen::MatrixXd x, Eigen::VectorXd y,
                                       std::optional<Eigen::VectorXd> input_lo = std::nullopt,
                                       std::optional<Eigen::VectorXd> input_hi = std::nullopt);

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index d() const { return x_.cols(); }

  const Eigen::MatrixXd& x() const { return x_; }              // original units
  const Eigen::VectorXd& y_raw() const { return y_raw_; }      // original units
  const Eigen::VectorXd& y() const { return y_; }              // standardized
  const Eigen::MatrixXd& x_scaled() const { return x_scaled_; }  // [0,1]^d
  const StandardizeTransform& transform() const { return transform_; }
  const PairwiseSqDist& sq_dist() const { return sq_dist_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_raw_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_scaled_;
  StandardizeTransform transform_;
  PairwiseSqDist sq_dist_;
};

/// One complete draw of all unknowns. The latent variance process is carried
/// on the log scale (w = log V); V itself is derived.
struct ModelState {
  double beta0 = 0.0;
  double omega = 0.7;
  Eigen::VectorXd rho_g;
  Eigen::VectorXd rho_l;
  double sigma2_eps = 0.0;
  Eigen::VectorXd w;  // log sigma^2(x_i) at the training inputs
  double mu_v = 0.0;
  double sigma2_v = 1.0;
  Eigen::VectorXd rho_v;

  Eigen::VectorXd v() const { return w.array().exp(); }

  /// True when every component lies in the prior support.
  bool in_support(const HyperParams& hp) const;

  /// Default initial state: guaranteed positive posterior density.
  static ModelState initial(Eigen::Index n, Eigen::Index d, const HyperParams& hp);

  /// Data-informed initial state: the latent log-variance field starts at a
  /// GP-smoothed local-residual estimate instead of a constant, which puts
  /// heteroscedastic fits inside the right posterior basin from the first
  /// iteration. Falls back to initial() behavior for the other components.
  static ModelState initial_from_data(const TrainingSet& data, const HyperParams& hp);
};

/// Standardize a raw response; throws on constant input (sd = 0).
StandardizeTransform standardize(const Eigen::VectorXd& y_raw, const Eigen::VectorXd& input_lo,
                                 const Eigen::VectorXd& input_hi);

// Log densities. All are written on the internal (standardized) scale.

/// log N(y; beta0 1, C) with C from build_cov_matrix.
double log_likelihood(const ModelState& state, const TrainingSet& data, const HyperParams& hp);

/// log N(w; mu_v 1, sigma2_v R) with R_ij = G(x_i - x_j | rho_v). The Jacobian
/// of the log transform is not included; w is the sampler's coordinate.
double log_latent_variance_density(const ModelState& state, const TrainingSet& data,
                                   const HyperParams& hp);

/// Sum of all prior terms except the latent-process density (flat beta0,
/// omega, rho_G, rho_L | rho_G, sigma2_eps, mu_V, sigma2_V, rho_V).
/// Returns -inf outside the support.
double log_prior_static(const ModelState& state, const HyperParams& hp);

/// log_prior_static + log_latent_variance_density.
double log_prior(const ModelState& state, const TrainingSet& data, const HyperParams& hp);

/// log_likelihood + log_prior; the likelihood is skipped when the prior is
/// already -inf.
double log_posterior(const ModelState& state, const TrainingSet& data, const HyperParams& hp);

// Pieces used by the sampler against cached factorizations.
double log_likelihood_given(const CovMatrix& c, double beta0, const Eigen::VectorXd& y);
double log_latent_density_given(const CovMatrix& r_corr, const Eigen::VectorXd& w, double mu_v,
                                double sigma2_v);

}  // namespace bcgp
