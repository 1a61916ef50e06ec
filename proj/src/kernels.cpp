#include "bcgp/kernels.hpp"

#include <cmath>
#include <limits>

#include "bcgp/model.hpp"

namespace bcgp {

CorrelationParams::CorrelationParams(Eigen::VectorXd rho_, double scale_constant_)
    : rho(std::move(rho_)), scale_constant(scale_constant_) {
  for (Eigen::Index j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > 0.0 && rho[j] < 1.0))
      throw std::invalid_argument("CorrelationParams: rho must lie strictly in (0,1)");
  }
  if (!(scale_constant > 0.0))
    throw std::invalid_argument("CorrelationParams: scale constant must be > 0");
}

double gauss_corr(const Eigen::VectorXd& h, const CorrelationParams& params) {
  if (h.size() != params.rho.size())
    throw std::invalid_argument("gauss_corr: dimension mismatch");
  double log_corr = 0.0;
  for (Eigen::Index j = 0; j < h.size(); ++j)
    log_corr += params.scale_constant * h[j] * h[j] * std::log(params.rho[j]);
  return std::exp(log_corr);
}

CovMatrix CovMatrix::factor(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("CovMatrix: matrix must be square");
  CovMatrix out;
  const double mean_diag = m.diagonal().mean();
  // A factorization whose trailing pivots fall below 1e-4 of the leading one
  // is numeric noise rather than a usable factor: elimination round-off on
  // these kernels produces spurious positive Schur complements as large as
  // ~1e-9 of lambda_max. Treat such factors like failures and escalate the
  // jitter so repeated evaluations stay consistent with each other.
  const double pivot_floor = 1e-4;
  double eps = 0.0;
  for (;;) {
    Eigen::MatrixXd attempt = m;
    if (eps > 0.0) attempt.diagonal().array() += eps * mean_diag;
    out.llt_.compute(attempt);
    if (out.llt_.info() == Eigen::Success) {
      const auto& pivots = out.llt_.matrixLLT().diagonal();
      if (pivots.minCoeff() >= pivot_floor * pivots.maxCoeff()) {
        out.entries_ = std::move(attempt);
        out.jitter_applied_ = eps * mean_diag;
        return out;
      }
    }
    eps = (eps == 0.0) ? 1e-10 : eps * 10.0;
    if (eps > 1e-6 * 1.0000001)
      throw IllConditionedCovariance(
          "covariance matrix not positive definite after maximum jitter");
  }
}

double CovMatrix::logdet() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

PairwiseSqDist PairwiseSqDist::from(const Eigen::MatrixXd& points) {
  PairwiseSqDist out;
  out.n = points.rows();
  const Eigen::Index d = points.cols();
  out.per_dim.reserve(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col = points.col(j);
    Eigen::MatrixXd diff = col.replicate(1, out.n) - col.transpose().replicate(out.n, 1);
    out.per_dim.push_back(diff.array().square().matrix());
  }
  return out;
}

Eigen::MatrixXd corr_matrix(const PairwiseSqDist& d2, const Eigen::VectorXd& rho, double k) {
  const Eigen::Index n = d2.n;
  Eigen::MatrixXd log_corr = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < d2.per_dim.size(); ++j)
    log_corr += (k * std::log(rho[static_cast<Eigen::Index>(j)])) * d2.per_dim[j];
  Eigen::MatrixXd out = log_corr.array().exp();
  out.diagonal().setOnes();
  return out;
}

Eigen::VectorXd corr_cross(const Eigen::VectorXd& point, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& rho, double k) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd log_corr = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const Eigen::ArrayXd diff = points.col(j).array() - point[j];
    log_corr.array() += (k * std::log(rho[j])) * diff.square();
  }
  return log_corr.array().exp();
}

CovMatrix build_cov_matrix(const Eigen::MatrixXd& x_scaled, const ModelState& state,
                           const HyperParams& hp) {
  return build_cov_matrix(PairwiseSqDist::from(x_scaled), state, hp);
}

CovMatrix build_cov_matrix(const PairwiseSqDist& d2, const ModelState& state,
                           const HyperParams& hp) {
  const Eigen::Index n = d2.n;
  if (state.w.size() != n)
    throw std::invalid_argument("build_cov_matrix: V length does not match input count");
  const Eigen::MatrixXd g = corr_matrix(d2, state.rho_g, hp.k_g);
  const Eigen::MatrixXd l = corr_matrix(d2, state.rho_l, hp.k_l);
  const Eigen::VectorXd sigma = state.w.array().exp().sqrt();
  Eigen::MatrixXd c =
      (sigma * sigma.transpose()).cwiseProduct(state.omega * g + (1.0 - state.omega) * l);
  c.diagonal() = state.v();  // G = L = 1 at h = 0
  c.diagonal().array() += state.sigma2_eps;
  return CovMatrix::factor(std::move(c));
}

Eigen::VectorXd build_cross_cov(const Eigen::VectorXd& x_star_scaled, double sigma_star,
                                const Eigen::MatrixXd& x_scaled, const ModelState& state,
                                const HyperParams& hp) {
  const Eigen::VectorXd g = corr_cross(x_star_scaled, x_scaled, state.rho_g, hp.k_g);
  const Eigen::VectorXd l = corr_cross(x_star_scaled, x_scaled, state.rho_l, hp.k_l);
  const Eigen::VectorXd sigma = state.w.array().exp().sqrt();
  return sigma_star *
         sigma.cwiseProduct(state.omega * g + (1.0 - state.omega) * l);
}

}  // namespace bcgp
