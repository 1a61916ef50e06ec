#pragma once

#include <limits>

#include "bcgp/rng.hpp"

namespace bcgp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Univariate distribution kit used by the prior model. Parameterizations are
/// fixed as follows and must not be changed silently:
///   Gamma(a, b)         mean = a*b            (b is a scale)
///   InverseGamma(a, b)  mean = 1/((a-1)*b)    (b enters as a reciprocal scale,
///                                              i.e. scale of the inverse = 1/b)

struct NormalDist {
  double mean;
  double variance;

  NormalDist(double mean_, double variance_);
  double logpdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
};

struct GammaDist {
  double shape;
  double scale;

  GammaDist(double shape_, double scale_);
  double logpdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  double mean() const { return shape * scale; }
};

struct InverseGammaDist {
  double shape;
  double b;  // reciprocal-scale parameter; the scale of 1/X is b

  InverseGammaDist(double shape_, double b_);
  double logpdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  double mean() const;  // requires shape > 1
};

struct BetaDist {
  double alpha;
  double beta;

  BetaDist(double alpha_, double beta_);
  double logpdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  double mean() const { return alpha / (alpha + beta); }
};

/// Beta variable mapped affinely onto (lo, hi):
///   p(x) = B(a,b)^{-1} (x-lo)^{a-1} (hi-x)^{b-1} / (hi-lo)^{a+b-1}
/// with mean lo + a/(a+b)*(hi-lo) and
/// variance a*b*(hi-lo)^2 / ((a+b)^2 (a+b+1)).
struct TruncatedBeta {
  double alpha;
  double beta;
  double lo;
  double hi;

  TruncatedBeta(double alpha_, double beta_, double lo_, double hi_);
  double logpdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  double mean() const { return lo + alpha / (alpha + beta) * (hi - lo); }
  double variance() const;
};

double trbeta_logpdf(double x, const TruncatedBeta& dist);
double trbeta_sample(const TruncatedBeta& dist, Rng& rng);

}  // namespace bcgp
