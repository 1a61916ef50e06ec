#include "bcgp/kriging.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bcgp/testbed.hpp"

namespace bcgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kScaleConstant = 16.0;  // same convention as the main model

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ProfileFit {
  Eigen::VectorXd beta_hat;
  double sigma2_hat = 0.0;
  double loglik = -std::numeric_limits<double>::infinity();
  CovMatrix r;
  Eigen::MatrixXd f;
  Eigen::VectorXd r_inv_resid;
  Eigen::MatrixXd ftrf_inv;
};

Eigen::MatrixXd basis_matrix(MeanBasis basis, const Eigen::MatrixXd& x_scaled) {
  Eigen::MatrixXd f(x_scaled.rows(), kriging_basis(basis, x_scaled.row(0).transpose()).size());
  for (Eigen::Index i = 0; i < x_scaled.rows(); ++i)
    f.row(i) = kriging_basis(basis, x_scaled.row(i).transpose()).transpose();
  return f;
}

ProfileFit profile_fit(const TrainingSet& data, MeanBasis basis, const Eigen::VectorXd& rho,
                       double nugget, KrigingEstimator estimator) {
  const Eigen::Index n = data.n();
  ProfileFit out;
  Eigen::MatrixXd r_entries = corr_matrix(data.sq_dist(), rho, kScaleConstant);
  r_entries.diagonal().array() += nugget;
  out.r = CovMatrix::factor(std::move(r_entries));
  out.f = basis_matrix(basis, data.x_scaled());
  if (n <= out.f.cols())
    throw std::invalid_argument("kriging: need more observations than basis functions");

  const Eigen::MatrixXd r_inv_f = out.r.solve(out.f);
  const Eigen::MatrixXd ftrf = out.f.transpose() * r_inv_f;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(ftrf);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::invalid_argument("kriging: singular basis matrix");
  out.beta_hat = ldlt.solve(r_inv_f.transpose() * data.y());
  out.ftrf_inv = ldlt.solve(Eigen::MatrixXd::Identity(ftrf.rows(), ftrf.cols()));

  const Eigen::VectorXd resid = data.y() - out.f * out.beta_hat;
  out.r_inv_resid = out.r.solve(resid);
  if (estimator == KrigingEstimator::MaximumLikelihood) {
    out.sigma2_hat = resid.dot(out.r_inv_resid) / static_cast<double>(n);
    out.loglik = -0.5 * (static_cast<double>(n) * (kLog2Pi + std::log(out.sigma2_hat) + 1.0) +
                         out.r.logdet());
  } else {
    const double dof = static_cast<double>(n - out.f.cols());
    out.sigma2_hat = resid.dot(out.r_inv_resid) / dof;
    const double logdet_ftrf = ldlt.vectorD().array().abs().log().sum();
    out.loglik = -0.5 * (dof * (kLog2Pi + std::log(out.sigma2_hat) + 1.0) + out.r.logdet() +
                         logdet_ftrf);
  }
  return out;
}

/// Nelder-Mead on an unconstrained objective; small and self-contained, the
/// usual choice for these low-dimensional profile-likelihood searches.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                            const Eigen::VectorXd& start, int max_iter) {
  const Eigen::Index dim = start.size();
  std::vector<Eigen::VectorXd> simplex(dim + 1, start);
  std::vector<double> value(dim + 1);
  for (Eigen::Index j = 0; j < dim; ++j) simplex[j + 1][j] += 0.5;
  for (std::size_t i = 0; i < simplex.size(); ++i) value[i] = objective(simplex[i]);

  auto order = [&] {
    for (std::size_t i = 1; i < simplex.size(); ++i)
      for (std::size_t j = i; j > 0 && value[j] < value[j - 1]; --j) {
        std::swap(value[j], value[j - 1]);
        std::swap(simplex[j], simplex[j - 1]);
      }
  };
  order();

  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(value.back() - value.front()) < 1e-10) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index j = 0; j < dim; ++j) centroid += simplex[static_cast<std::size_t>(j)];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex.back());
    const double f_reflected = objective(reflected);
    if (f_reflected < value.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex.back());
      const double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        simplex.back() = expanded;
        value.back() = f_expanded;
      } else {
        simplex.back() = reflected;
        value.back() = f_reflected;
      }
    } else if (f_reflected < value[value.size() - 2]) {
      simplex.back() = reflected;
      value.back() = f_reflected;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (simplex.back() - centroid);
      const double f_contracted = objective(contracted);
      if (f_contracted < value.back()) {
        simplex.back() = contracted;
        value.back() = f_contracted;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex.front() + 0.5 * (simplex[i] - simplex.front());
          value[i] = objective(simplex[i]);
        }
      }
    }
    order();
  }
  return simplex.front();
}

}  // namespace

Eigen::VectorXd kriging_basis(MeanBasis basis, const Eigen::VectorXd& x_scaled) {
  switch (basis) {
    case MeanBasis::Constant: return Eigen::VectorXd::Ones(1);
    case MeanBasis::Linear: {
      Eigen::VectorXd f(x_scaled.size() + 1);
      f[0] = 1.0;
      f.tail(x_scaled.size()) = x_scaled;
      return f;
    }
    case MeanBasis::Cubic: {
      if (x_scaled.size() != 1)
        throw std::invalid_argument("kriging: cubic mean basis requires d = 1");
      Eigen::VectorXd f(4);
      const double x = x_scaled[0];
      f << 1.0, x, x * x, x * x * x;
      return f;
    }
  }
  throw std::logic_error("unreachable");
}

double kriging_profile_loglik(const TrainingSet& data, MeanBasis basis,
                              const Eigen::VectorXd& rho, double nugget,
                              KrigingEstimator estimator) {
  return profile_fit(data, basis, rho, nugget, estimator).loglik;
}

KrigingModel fit_kriging(const TrainingSet& data, MeanBasis basis, double nugget,
                         KrigingEstimator estimator) {
  if (nugget < 0.0) throw std::invalid_argument("fit_kriging: nugget must be >= 0");
  const Eigen::Index d = data.d();

  auto objective = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd rho(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      rho[j] = expit(z[j]);
      rho[j] = std::min(std::max(rho[j], 1e-9), 1.0 - 1e-9);
    }
    try {
      return -kriging_profile_loglik(data, basis, rho, nugget, estimator);
    } catch (const IllConditionedCovariance&) {
      return std::numeric_limits<double>::max();
    }
  };

  const Eigen::MatrixXd starts = sobol_points(16, static_cast<int>(d));
  bool found = false;
  double best_value = std::numeric_limits<double>::max();
  Eigen::VectorXd best_rho(d);
  for (Eigen::Index s = 0; s < starts.rows(); ++s) {
    Eigen::VectorXd z0(d);
    for (Eigen::Index j = 0; j < d; ++j) z0[j] = logit(0.05 + 0.9 * starts(s, j));
    const Eigen::VectorXd z_opt = nelder_mead(objective, z0, 400);
    const double value = objective(z_opt);
    if (value < best_value) {
      best_value = value;
      for (Eigen::Index j = 0; j < d; ++j)
        best_rho[j] = std::min(std::max(expit(z_opt[j]), 1e-9), 1.0 - 1e-9);
      found = true;
    }
  }
  if (!found || best_value == std::numeric_limits<double>::max())
    throw std::runtime_error("fit_kriging: every optimizer start failed");

  ProfileFit fit = profile_fit(data, basis, best_rho, nugget, estimator);
  KrigingModel model;
  model.basis_ = basis;
  model.beta_hat_ = fit.beta_hat;
  model.sigma2_hat_ = fit.sigma2_hat;
  model.rho_hat_ = best_rho;
  model.nugget_ = nugget;
  model.profile_loglik_ = fit.loglik;
  model.data_ = data;
  model.r_ = std::move(fit.r);
  model.f_ = std::move(fit.f);
  model.r_inv_resid_ = std::move(fit.r_inv_resid);
  model.ftrf_inv_ = std::move(fit.ftrf_inv);
  return model;
}

std::pair<double, double> KrigingModel::predict(const Eigen::VectorXd& x_star) const {
  const Eigen::VectorXd xs = data_.transform().scale_point(x_star);
  const Eigen::VectorXd r_star = corr_cross(xs, data_.x_scaled(), rho_hat_, kScaleConstant);
  const Eigen::VectorXd f_star = kriging_basis(basis_, xs);
  const double mean_std = f_star.dot(beta_hat_) + r_star.dot(r_inv_resid_);

  const Eigen::VectorXd r_inv_rstar = r_.solve(r_star);
  const Eigen::VectorXd u = f_star - f_.transpose() * r_inv_rstar;
  const double inflate = u.dot(ftrf_inv_ * u);
  const double var_std =
      std::max(0.0, sigma2_hat_ * (1.0 + nugget_ - r_star.dot(r_inv_rstar) + inflate));

  const StandardizeTransform& t = data_.transform();
  return {t.to_original(mean_std), t.scale * t.scale * var_std};
}

std::pair<double, double> kriging_predict(const KrigingModel& model,
                                          const Eigen::VectorXd& x_star) {
  return model.predict(x_star);
}

}  // namespace bcgp
