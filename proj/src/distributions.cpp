#include "bcgp/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace bcgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

// ---------------------------------------------------------------- Normal

NormalDist::NormalDist(double mean_, double variance_) : mean(mean_), variance(variance_) {
  require(variance > 0.0, "NormalDist: variance must be > 0");
}

double NormalDist::logpdf(double x) const {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

double NormalDist::cdf(double x) const {
  return 0.5 * boost::math::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double NormalDist::sample(Rng& rng) const { return mean + std::sqrt(variance) * rng.normal(); }

// ----------------------------------------------------------------- Gamma

GammaDist::GammaDist(double shape_, double scale_) : shape(shape_), scale(scale_) {
  require(shape > 0.0 && scale > 0.0, "GammaDist: shape and scale must be > 0");
}

double GammaDist::logpdf(double x) const {
  if (x <= 0.0) return kNegInf;
  return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) -
         std::lgamma(shape);
}

double GammaDist::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

double GammaDist::sample(Rng& rng) const { return rng.gamma(shape, scale); }

// ---------------------------------------------------------- InverseGamma

InverseGammaDist::InverseGammaDist(double shape_, double b_) : shape(shape_), b(b_) {
  require(shape > 0.0 && b > 0.0, "InverseGammaDist: shape and b must be > 0");
}

double InverseGammaDist::logpdf(double x) const {
  if (x <= 0.0) return kNegInf;
  // X ~ IG(a, b)  <=>  1/X ~ Gamma(a, scale = b); density scale of X is 1/b.
  return -shape * std::log(b) - std::lgamma(shape) - (shape + 1.0) * std::log(x) -
         1.0 / (b * x);
}

double InverseGammaDist::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_q(shape, 1.0 / (b * x));
}

double InverseGammaDist::sample(Rng& rng) const { return 1.0 / rng.gamma(shape, b); }

double InverseGammaDist::mean() const {
  require(shape > 1.0, "InverseGammaDist: mean requires shape > 1");
  return 1.0 / ((shape - 1.0) * b);
}

// ------------------------------------------------------------------ Beta

BetaDist::BetaDist(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
  require(alpha > 0.0 && beta > 0.0, "BetaDist: shapes must be > 0");
}

double BetaDist::logpdf(double x) const {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) +
         std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
}

double BetaDist::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(alpha, beta, x);
}

double BetaDist::sample(Rng& rng) const {
  const double g1 = rng.gamma(alpha, 1.0);
  const double g2 = rng.gamma(beta, 1.0);
  return g1 / (g1 + g2);
}

// --------------------------------------------------------- TruncatedBeta

TruncatedBeta::TruncatedBeta(double alpha_, double beta_, double lo_, double hi_)
    : alpha(alpha_), beta(beta_), lo(lo_), hi(hi_) {
  require(alpha > 0.0 && beta > 0.0, "TruncatedBeta: shapes must be > 0");
  require(lo < hi, "TruncatedBeta: requires lo < hi");
}

double TruncatedBeta::logpdf(double x) const {
  if (x <= lo || x >= hi) return kNegInf;
  const double width = hi - lo;
  return std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta) +
         (alpha - 1.0) * std::log(x - lo) + (beta - 1.0) * std::log(hi - x) -
         (alpha + beta - 1.0) * std::log(width);
}

double TruncatedBeta::cdf(double x) const {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  return boost::math::ibeta(alpha, beta, (x - lo) / (hi - lo));
}

double TruncatedBeta::sample(Rng& rng) const {
  // Inverse CDF of the mapped beta; robust for the narrow intervals used in
  // the omega and rho_L priors.
  const double u = rng.uniform();
  const double z = boost::math::ibeta_inv(alpha, beta, u);
  return lo + (hi - lo) * z;
}

double TruncatedBeta::variance() const {
  const double s = alpha + beta;
  const double w = hi - lo;
  return alpha * beta * w * w / (s * s * (s + 1.0));
}

double trbeta_logpdf(double x, const TruncatedBeta& dist) { return dist.logpdf(x); }

double trbeta_sample(const TruncatedBeta& dist, Rng& rng) { return dist.sample(rng); }

}  // namespace bcgp
