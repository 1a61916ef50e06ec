#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "bcgp/mcmc.hpp"
#include "bcgp/model.hpp"
#include "bcgp/rng.hpp"

namespace bcgp {

/// Posterior predictive summary at one input, in original units. The global
/// component carries the overall mean beta0, so global + local + error equals
/// the Rao-Blackwellized mean.
struct PredictionResult {
  Eigen::VectorXd x_star;
  double rb_mean = 0.0;    // Rao-Blackwellized posterior predictive mean
  double draw_mean = 0.0;  // plain average of the predictive draws
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  double comp_global = 0.0;
  double comp_local = 0.0;
  double comp_error = 0.0;
  Eigen::VectorXd samples;  // per-draw predictive samples (empty unless kept)
};

/// Draw the latent log-variance at x_star from its conditional given the
/// training-site values:
///   W* ~ N(mu_V + R*'R^{-1}(W - mu_V 1), sigma2_V (1 - R*'R^{-1}R*)).
/// x_star is in original units. Round-off negatives in the conditional
/// variance are clamped to zero.
double sample_w_star(const Eigen::VectorXd& x_star, const ModelState& state,
                     const TrainingSet& data, const HyperParams& hp, Rng& rng);

/// Conditional predictive moments given one posterior state and sigma2(x_*):
///   mean = beta0 + C*'C^{-1}(y - beta0 1)
///   var  = sigma2(x_*) + sigma2_eps - C*'C^{-1}C*     (clamped at 0)
/// Standardized scale.
std::pair<double, double> cond_pred_moments(const Eigen::VectorXd& x_star, double sigma2_star,
                                            const ModelState& state, const TrainingSet& data,
                                            const HyperParams& hp);

/// Rao-Blackwellized predictive mean across the chain, in original units.
double rb_mean(const Eigen::VectorXd& x_star, const std::vector<ModelState>& chain,
               const TrainingSet& data, const HyperParams& hp, Rng& rng);

/// One predictive draw per posterior state, in original units.
Eigen::VectorXd predictive_draws(const Eigen::VectorXd& x_star,
                                 const std::vector<ModelState>& chain, const TrainingSet& data,
                                 const HyperParams& hp, Rng& rng);

/// Empirical central interval at the given level; percentiles use linear
/// interpolation between the closest order statistics (h = q*n + 1/2).
std::pair<double, double> predictive_interval(const Eigen::VectorXd& samples, double level);

/// Percentile helper shared by intervals and box summaries.
double percentile(const Eigen::VectorXd& values, double q);

/// Posterior-mean global/local/error decomposition, original units.
std::array<double, 3> decompose_prediction(const Eigen::VectorXd& x_star,
                                           const std::vector<ModelState>& chain,
                                           const TrainingSet& data, const HyperParams& hp,
                                           Rng& rng);

/// Full predictive pass over a batch of points. Each point consumes an
/// independent RNG stream derived from `seed`, so results do not depend on
/// evaluation order.
std::vector<PredictionResult> predict_points(const Eigen::MatrixXd& x_stars,
                                             const std::vector<ModelState>& chain,
                                             const TrainingSet& data, const HyperParams& hp,
                                             double level, std::uint64_t seed,
                                             bool keep_samples = false);

}  // namespace bcgp
