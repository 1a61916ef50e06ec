#pragma once

#include <utility>

#include <Eigen/Dense>

#include "bcgp/model.hpp"

namespace bcgp {

/// Mean-function basis for the universal-kriging baseline. Cubic is the 1-d
/// polynomial basis {1, x, x^2, x^3}.
enum class MeanBasis { Constant, Linear, Cubic };

/// Correlation-parameter estimator. Maximum likelihood degenerates toward
/// the flat (rho -> 1) limit on noiseless smooth responses when the basis
/// has more than one column; the restricted likelihood's basis-information
/// term keeps the optimum interior there.
enum class KrigingEstimator { MaximumLikelihood, Reml };

/// Universal-kriging model with Gaussian correlation, fitted by maximum
/// likelihood (beta and the process variance profiled out analytically, the
/// correlation parameters found by multi-start local search).
class KrigingModel {
 public:
  MeanBasis basis() const { return basis_; }
  const Eigen::VectorXd& beta_hat() const { return beta_hat_; }
  double sigma2_hat() const { return sigma2_hat_; }
  const Eigen::VectorXd& rho_hat() const { return rho_hat_; }
  double nugget() const { return nugget_; }
  double profile_loglik() const { return profile_loglik_; }

  /// Plug-in BLUP mean and variance at x_star (original units). The variance
  /// includes the GLS mean-estimation inflation term.
  std::pair<double, double> predict(const Eigen::VectorXd& x_star) const;

 private:
  friend KrigingModel fit_kriging(const TrainingSet&, MeanBasis, double, KrigingEstimator);
  MeanBasis basis_ = MeanBasis::Constant;
  Eigen::VectorXd beta_hat_;
  double sigma2_hat_ = 0.0;
  Eigen::VectorXd rho_hat_;
  double nugget_ = 0.0;
  double profile_loglik_ = 0.0;
  TrainingSet data_;
  CovMatrix r_;
  Eigen::MatrixXd f_;
  Eigen::VectorXd r_inv_resid_;
  Eigen::MatrixXd ftrf_inv_;  // (F' R^{-1} F)^{-1}
};

/// Basis expansion at one (rescaled) input.
Eigen::VectorXd kriging_basis(MeanBasis basis, const Eigen::VectorXd& x_scaled);

/// Profile log likelihood at fixed correlation parameters.
double kriging_profile_loglik(const TrainingSet& data, MeanBasis basis,
                              const Eigen::VectorXd& rho, double nugget = 0.0,
                              KrigingEstimator estimator = KrigingEstimator::MaximumLikelihood);

/// Fit over rho in (0,1)^d using 16 quasi-random multistarts.
KrigingModel fit_kriging(const TrainingSet& data, MeanBasis basis, double nugget = 0.0,
                         KrigingEstimator estimator = KrigingEstimator::MaximumLikelihood);

std::pair<double, double> kriging_predict(const KrigingModel& model,
                                          const Eigen::VectorXd& x_star);

}  // namespace bcgp
