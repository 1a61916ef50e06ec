#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace bcgp {

struct ModelState;
struct HyperParams;

/// Thrown when a covariance matrix cannot be factorized even after the
/// maximum diagonal jitter has been applied.
class IllConditionedCovariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of the Gaussian product correlation
///   corr(h) = prod_j rho[j]^(scale_constant * h_j^2).
/// The scale constant (16 by default, on inputs rescaled to [0,1]^d) keeps
/// the correlation matrices numerically workable for unit-variance data.
struct CorrelationParams {
  Eigen::VectorXd rho;
  double scale_constant;

  CorrelationParams(Eigen::VectorXd rho_, double scale_constant_);
};

/// corr(h) for a displacement vector h, in (0, 1].
double gauss_corr(const Eigen::VectorXd& h, const CorrelationParams& params);

/// Symmetric positive definite matrix bundled with its Cholesky factor.
/// Factorization happens at construction; if plain Cholesky fails, jitter
/// eps*mean(diag) is added with eps escalating 1e-10, 1e-9, ..., 1e-6 before
/// IllConditionedCovariance is thrown. The applied jitter is recorded.
class CovMatrix {
 public:
  /// Empty matrix; factor() produces usable instances.
  CovMatrix() = default;

  static CovMatrix factor(Eigen::MatrixXd m);

  const Eigen::MatrixXd& entries() const { return entries_; }
  double jitter_applied() const { return jitter_applied_; }
  Eigen::Index size() const { return entries_.rows(); }

  /// C^{-1} * b via the stored factorization; never forms the inverse.
  template <typename Derived>
  auto solve(const Eigen::MatrixBase<Derived>& b) const {
    return llt_.solve(b).eval();
  }

  /// log |C|
  double logdet() const;

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  /// Lower-triangular factor L with C = L L^T, for sampling.
  Eigen::MatrixXd cholesky_lower() const { return llt_.matrixL(); }

 private:
  Eigen::MatrixXd entries_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_applied_ = 0.0;
};

inline Eigen::VectorXd pd_solve(const CovMatrix& c, const Eigen::VectorXd& b) {
  return c.solve(b);
}
inline Eigen::MatrixXd pd_solve(const CovMatrix& c, const Eigen::MatrixXd& b) {
  return c.solve(b);
}
inline double pd_logdet(const CovMatrix& c) { return c.logdet(); }

/// Per-dimension squared displacements between rows of a point set, cached so
/// that repeated correlation-matrix builds cost one exp per entry.
struct PairwiseSqDist {
  std::vector<Eigen::MatrixXd> per_dim;  // d matrices, each n x n
  Eigen::Index n = 0;

  static PairwiseSqDist from(const Eigen::MatrixXd& points);
};

/// Correlation matrix prod_j rho[j]^(k * d2_j) from cached displacements.
/// Diagonal entries are exactly 1.
Eigen::MatrixXd corr_matrix(const PairwiseSqDist& d2, const Eigen::VectorXd& rho, double k);

/// Correlation vector between one point and each row of a point set.
Eigen::VectorXd corr_cross(const Eigen::VectorXd& point, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& rho, double k);

/// Covariance matrix of the observed process at the training inputs:
///   C_ij = sigma(x_i) sigma(x_j) [w G_ij + (1-w) L_ij] + delta_ij sigma2_eps,
/// so diag(C) = V + sigma2_eps. Inputs must already be rescaled to [0,1]^d.
CovMatrix build_cov_matrix(const Eigen::MatrixXd& x_scaled, const ModelState& state,
                           const HyperParams& hp);

/// Same, reusing cached pairwise displacements (sampler hot path).
CovMatrix build_cov_matrix(const PairwiseSqDist& d2, const ModelState& state,
                           const HyperParams& hp);

/// Cross-covariance between the process at x_star and at the training inputs.
/// No nugget term, even when x_star coincides with a training point; the
/// error component of a prediction is handled separately.
Eigen::VectorXd build_cross_cov(const Eigen::VectorXd& x_star_scaled, double sigma_star,
                                const Eigen::MatrixXd& x_scaled, const ModelState& state,
                                const HyperParams& hp);

}  // namespace bcgp
