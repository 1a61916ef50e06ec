#include "bcgp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcgp {

namespace {

/// Index of the training row equal to the (scaled) prediction point, or -1.
/// The error component of the cross covariance is nonzero only here.
Eigen::Index coincident_row(const Eigen::MatrixXd& x_scaled, const Eigen::VectorXd& xs) {
  for (Eigen::Index i = 0; i < x_scaled.rows(); ++i)
    if ((x_scaled.row(i).transpose() - xs).squaredNorm() == 0.0) return i;
  return -1;
}

/// Per-posterior-draw quantities shared by every prediction point.
struct StateContext {
  const ModelState* state = nullptr;
  CovMatrix c;
  CovMatrix r;
  Eigen::VectorXd c_inv_resid;  // C^{-1}(y - beta0 1)
  Eigen::VectorXd r_inv_wres;   // R^{-1}(W - mu_V 1)
  Eigen::VectorXd sigma;        // sqrt(V) at the training sites

  StateContext(const ModelState& s, const TrainingSet& data, const HyperParams& hp) {
    state = &s;
    c = build_cov_matrix(data.sq_dist(), s, hp);
    r = CovMatrix::factor(corr_matrix(data.sq_dist(), s.rho_v, hp.k_v));
    c_inv_resid = c.solve((data.y().array() - s.beta0).matrix());
    r_inv_wres = r.solve((s.w.array() - s.mu_v).matrix());
    sigma = s.w.array().exp().sqrt();
  }
};

struct PointDraw {
  double mean = 0.0;  // conditional predictive mean (standardized)
  double var = 0.0;   // conditional predictive variance
  double comp_g = 0.0;
  double comp_l = 0.0;
  double comp_e = 0.0;
};

/// Conditional moments and decomposition at one point for one posterior draw;
/// consumes exactly one normal variate (the W* draw).
PointDraw eval_point(const Eigen::VectorXd& xs_scaled, const StateContext& ctx,
                     const TrainingSet& data, const HyperParams& hp, Rng& rng) {
  const ModelState& s = *ctx.state;

  const Eigen::VectorXd r_star = corr_cross(xs_scaled, data.x_scaled(), s.rho_v, hp.k_v);
  const double w_mean = s.mu_v + r_star.dot(ctx.r_inv_wres);
  const double w_var =
      std::max(0.0, s.sigma2_v * (1.0 - r_star.dot(ctx.r.solve(r_star))));
  const double w_star = w_mean + std::sqrt(w_var) * rng.normal();
  const double sigma_star = std::exp(0.5 * w_star);

  const Eigen::VectorXd g = corr_cross(xs_scaled, data.x_scaled(), s.rho_g, hp.k_g);
  const Eigen::VectorXd l = corr_cross(xs_scaled, data.x_scaled(), s.rho_l, hp.k_l);
  const Eigen::VectorXd c_g =
      (sigma_star * s.omega) * ctx.sigma.cwiseProduct(g);
  const Eigen::VectorXd c_l =
      (sigma_star * (1.0 - s.omega)) * ctx.sigma.cwiseProduct(l);

  Eigen::VectorXd c_star = c_g + c_l;
  const Eigen::Index k = coincident_row(data.x_scaled(), xs_scaled);
  if (k >= 0) c_star[k] += s.sigma2_eps;

  PointDraw out;
  out.comp_g = s.beta0 + c_g.dot(ctx.c_inv_resid);
  out.comp_l = c_l.dot(ctx.c_inv_resid);
  out.comp_e = (k >= 0) ? s.sigma2_eps * ctx.c_inv_resid[k] : 0.0;
  out.mean = s.beta0 + c_star.dot(ctx.c_inv_resid);
  out.var = std::max(0.0, sigma_star * sigma_star + s.sigma2_eps -
                              c_star.dot(ctx.c.solve(c_star)));
  return out;
}

}  // namespace

double sample_w_star(const Eigen::VectorXd& x_star, const ModelState& state,
                     const TrainingSet& data, const HyperParams& hp, Rng& rng) {
  const Eigen::VectorXd xs = data.transform().scale_point(x_star);
  const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), state.rho_v, hp.k_v));
  const Eigen::VectorXd r_star = corr_cross(xs, data.x_scaled(), state.rho_v, hp.k_v);
  const Eigen::VectorXd r_sol = r.solve(r_star);
  const double mean = state.mu_v + r_sol.dot((state.w.array() - state.mu_v).matrix());
  const double var = std::max(0.0, state.sigma2_v * (1.0 - r_star.dot(r_sol)));
  return mean + std::sqrt(var) * rng.normal();
}

std::pair<double, double> cond_pred_moments(const Eigen::VectorXd& x_star, double sigma2_star,
                                            const ModelState& state, const TrainingSet& data,
                                            const HyperParams& hp) {
  if (!(sigma2_star > 0.0))
    throw std::invalid_argument("cond_pred_moments: sigma2_star must be > 0");
  const Eigen::VectorXd xs = data.transform().scale_point(x_star);
  const CovMatrix c = build_cov_matrix(data.sq_dist(), state, hp);
  Eigen::VectorXd c_star =
      build_cross_cov(xs, std::sqrt(sigma2_star), data.x_scaled(), state, hp);
  const Eigen::Index k = coincident_row(data.x_scaled(), xs);
  if (k >= 0) c_star[k] += state.sigma2_eps;
  const Eigen::VectorXd resid = (data.y().array() - state.beta0).matrix();
  const double mean = state.beta0 + c_star.dot(c.solve(resid));
  const double var =
      std::max(0.0, sigma2_star + state.sigma2_eps - c_star.dot(c.solve(c_star)));
  return {mean, var};
}

double rb_mean(const Eigen::VectorXd& x_star, const std::vector<ModelState>& chain,
               const TrainingSet& data, const HyperParams& hp, Rng& rng) {
  if (chain.empty()) throw std::invalid_argument("rb_mean: chain is empty");
  const Eigen::VectorXd xs = data.transform().scale_point(x_star);
  double sum = 0.0;
  for (const ModelState& s : chain) {
    const StateContext ctx(s, data, hp);
    sum += eval_point(xs, ctx, data, hp, rng).mean;
  }
  return data.transform().to_original(sum / static_cast<double>(chain.size()));
}

Eigen::VectorXd predictive_draws(const Eigen::VectorXd& x_star,
                                 const std::vector<ModelState>& chain, const TrainingSet& data,
                                 const HyperParams& hp, Rng& rng) {
  if (chain.empty()) throw std::invalid_argument("predictive_draws: chain is empty");
  const Eigen::VectorXd xs = data.transform().scale_point(x_star);
  Eigen::VectorXd out(static_cast<Eigen::Index>(chain.size()));
  for (std::size_t t = 0; t < chain.size(); ++t) {
    const StateContext ctx(chain[t], data, hp);
    const PointDraw pd = eval_point(xs, ctx, data, hp, rng);
    const double y_std = pd.mean + std::sqrt(pd.var) * rng.normal();
    out[static_cast<Eigen::Index>(t)] = data.transform().to_original(y_std);
  }
  return out;
}

double percentile(const Eigen::VectorXd& values, double q) {
  if (values.size() == 0) throw std::invalid_argument("percentile: empty sample");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  const double h = q * m + 0.5;  // 1-based position
  if (h <= 1.0) return sorted.front();
  if (h >= m) return sorted.back();
  const auto k = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(k);
  return sorted[k - 1] + frac * (sorted[k] - sorted[k - 1]);
}

std::pair<double, double> predictive_interval(const Eigen::VectorXd& samples, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("predictive_interval: level must lie in (0,1)");
  const double alpha = 1.0 - level;
  return {percentile(samples, 0.5 * alpha), percentile(samples, 1.0 - 0.5 * alpha)};
}

std::array<double, 3> decompose_prediction(const Eigen::VectorXd& x_star,
                                           const std::vector<ModelState>& chain,
                                           const TrainingSet& data, const HyperParams& hp,
                                           Rng& rng) {
  if (chain.empty()) throw std::invalid_argument("decompose_prediction: chain is empty");
  const Eigen::VectorXd xs = data.transform().scale_point(x_star);
  double sum_g = 0.0, sum_l = 0.0, sum_e = 0.0;
  for (const ModelState& s : chain) {
    const StateContext ctx(s, data, hp);
    const PointDraw pd = eval_point(xs, ctx, data, hp, rng);
    sum_g += pd.comp_g;
    sum_l += pd.comp_l;
    sum_e += pd.comp_e;
  }
  const double inv = 1.0 / static_cast<double>(chain.size());
  const StandardizeTransform& t = data.transform();
  return {t.to_original(sum_g * inv), t.scale * sum_l * inv, t.scale * sum_e * inv};
}

std::vector<PredictionResult> predict_points(const Eigen::MatrixXd& x_stars,
                                             const std::vector<ModelState>& chain,
                                             const TrainingSet& data, const HyperParams& hp,
                                             double level, std::uint64_t seed,
                                             bool keep_samples) {
  if (chain.empty()) throw std::invalid_argument("predict_points: chain is empty");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("predict_points: level must lie in (0,1)");
  const Eigen::Index n_points = x_stars.rows();
  const auto n_draws = static_cast<Eigen::Index>(chain.size());

  std::vector<Rng> streams;
  streams.reserve(n_points);
  for (Eigen::Index k = 0; k < n_points; ++k)
    streams.emplace_back(Rng::derive_seed(seed, static_cast<std::uint64_t>(k)));

  Eigen::MatrixXd scaled(n_points, x_stars.cols());
  for (Eigen::Index k = 0; k < n_points; ++k)
    scaled.row(k) = data.transform().scale_point(x_stars.row(k).transpose()).transpose();

  Eigen::MatrixXd samples(n_points, n_draws);
  Eigen::VectorXd sum_mean = Eigen::VectorXd::Zero(n_points);
  Eigen::VectorXd sum_g = Eigen::VectorXd::Zero(n_points);
  Eigen::VectorXd sum_l = Eigen::VectorXd::Zero(n_points);
  Eigen::VectorXd sum_e = Eigen::VectorXd::Zero(n_points);

  for (Eigen::Index t = 0; t < n_draws; ++t) {
    const StateContext ctx(chain[static_cast<std::size_t>(t)], data, hp);
    for (Eigen::Index k = 0; k < n_points; ++k) {
      const PointDraw pd = eval_point(scaled.row(k).transpose(), ctx, data, hp, streams[k]);
      sum_mean[k] += pd.mean;
      sum_g[k] += pd.comp_g;
      sum_l[k] += pd.comp_l;
      sum_e[k] += pd.comp_e;
      samples(k, t) = pd.mean + std::sqrt(pd.var) * streams[k].normal();
    }
  }

  const StandardizeTransform& tr = data.transform();
  const double inv = 1.0 / static_cast<double>(n_draws);
  std::vector<PredictionResult> out(static_cast<std::size_t>(n_points));
  for (Eigen::Index k = 0; k < n_points; ++k) {
    PredictionResult& res = out[static_cast<std::size_t>(k)];
    res.x_star = x_stars.row(k).transpose();
    res.level = level;
    res.rb_mean = tr.to_original(sum_mean[k] * inv);
    res.comp_global = tr.to_original(sum_g[k] * inv);
    res.comp_local = tr.scale * sum_l[k] * inv;
    res.comp_error = tr.scale * sum_e[k] * inv;
    Eigen::VectorXd draws = samples.row(k).transpose();
    res.draw_mean = tr.to_original(draws.mean());
    const auto iv = predictive_interval(draws, level);
    res.lo = tr.to_original(iv.first);
    res.hi = tr.to_original(iv.second);
    if (keep_samples) {
      res.samples = draws.unaryExpr([&](double v) { return tr.to_original(v); });
    }
  }
  return out;
}

}  // namespace bcgp
