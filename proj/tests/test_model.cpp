#include <cmath>

#include <doctest.h>

#include "bcgp/model.hpp"
#include "helpers.hpp"

using namespace bcgp;
using bcgp::testing::dense_mvn_logpdf;
using bcgp::testing::make_unit_set;

namespace {

/// Two points at scaled distance 0.25 with the worked covariance values.
TrainingSet worked_data(const Eigen::VectorXd& y) {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 0.25;
  return make_unit_set(x, y);
}

ModelState worked_state() {
  ModelState s;
  s.beta0 = 0.0;
  s.omega = 0.6;
  s.rho_g = Eigen::VectorXd::Constant(1, 0.9);
  s.rho_l = Eigen::VectorXd::Constant(1, 0.5);
  s.sigma2_eps = 0.01;
  s.w = Eigen::VectorXd(2);
  s.w << std::log(1.0), std::log(4.0);
  s.mu_v = -0.1;
  s.sigma2_v = 0.5;
  s.rho_v = Eigen::VectorXd::Constant(1, 0.9);
  return s;
}

}  // namespace

TEST_CASE("standardize") {
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Ones(1);

  SUBCASE("symmetric triple") {
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, 3.0;
    const StandardizeTransform t = standardize(y, lo, hi);
    CHECK(t.center == doctest::Approx(2.0));
    CHECK(t.scale == doctest::Approx(1.0));
    CHECK(t.to_internal(1.0) == doctest::Approx(-1.0));
    CHECK(t.to_original(0.0) == doctest::Approx(2.0));
  }
  SUBCASE("two points use the n-1 denominator") {
    Eigen::VectorXd y(2);
    y << 0.0, 10.0;
    const StandardizeTransform t = standardize(y, lo, hi);
    CHECK(t.scale == doctest::Approx(7.0710678118654755).epsilon(1e-12));
    CHECK(t.to_internal(0.0) == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("round trip is the identity") {
    Eigen::VectorXd y(4);
    y << 3.2, -1.1, 7.7, 0.4;
    const StandardizeTransform t = standardize(y, lo, hi);
    for (int i = 0; i < 4; ++i)
      CHECK(t.to_original(t.to_internal(y[i])) == doctest::Approx(y[i]).epsilon(1e-12));
  }
  SUBCASE("constant response is degenerate") {
    Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 4.2);
    CHECK_THROWS_AS(standardize(y, lo, hi), std::invalid_argument);
  }
}

TEST_CASE("training set standardizes the response and rescales inputs") {
  Eigen::MatrixXd x(4, 1);
  x << 2.0, 4.0, 6.0, 8.0;
  Eigen::VectorXd y(4);
  y << 10.0, 30.0, 20.0, 40.0;
  const TrainingSet ts = TrainingSet::create(x, y);
  CHECK(std::abs(ts.y().mean()) < 1e-10);
  const double sd =
      std::sqrt(ts.y().array().square().sum() / static_cast<double>(ts.n() - 1));
  CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ts.x_scaled().minCoeff() == doctest::Approx(0.0));
  CHECK(ts.x_scaled().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("log_likelihood") {
  HyperParams hp;

  SUBCASE("single standard-normal point") {
    ModelState s = worked_state();
    s.w = Eigen::VectorXd::Zero(1);
    s.sigma2_eps = 0.0;
    const TrainingSet one =
        make_unit_set(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
    CHECK(log_likelihood(s, one, hp) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  }

  SUBCASE("zero quadratic form at y = beta0") {
    ModelState s = worked_state();
    s.beta0 = 0.7;
    s.sigma2_eps = 0.0;
    s.w = Eigen::VectorXd::Zero(1);
    const TrainingSet one =
        make_unit_set(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 0.7));
    CHECK(log_likelihood(s, one, hp) == doctest::Approx(-0.5 * testing::kLog2Pi).epsilon(1e-12));
  }

  SUBCASE("worked two-point case against the dense oracle") {
    Eigen::VectorXd y(2);
    y << 0.5, -0.5;
    const TrainingSet data = worked_data(y);
    const ModelState s = worked_state();
    Eigen::MatrixXd cov(2, 2);
    cov << 1.01, 1.48, 1.48, 4.01;
    const double expected = dense_mvn_logpdf(y, Eigen::VectorXd::Zero(2), cov);
    CHECK(log_likelihood(s, data, hp) == doctest::Approx(expected).epsilon(1e-10));
  }

  SUBCASE("likelihood is invariant to a joint shift of y and beta0") {
    Eigen::VectorXd y(2);
    y << 0.5, -0.5;
    const ModelState s = worked_state();
    ModelState shifted = s;
    shifted.beta0 += 2.5;
    CHECK(log_likelihood(s, worked_data(y), hp) ==
          doctest::Approx(log_likelihood(shifted, worked_data(y.array() + 2.5), hp))
              .epsilon(1e-12));
  }
}

TEST_CASE("log_latent_variance_density") {
  HyperParams hp;

  SUBCASE("single point at the latent mean") {
    ModelState s = worked_state();
    s.mu_v = -0.3;
    s.sigma2_v = 1.0;
    s.w = Eigen::VectorXd::Constant(1, -0.3);
    const TrainingSet one =
        make_unit_set(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
    CHECK(log_latent_variance_density(s, one, hp) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  }

  SUBCASE("density is maximal at w = mu_v") {
    Eigen::VectorXd y(2);
    y << 0.5, -0.5;
    const TrainingSet data = worked_data(y);
    ModelState s = worked_state();
    s.w = Eigen::VectorXd::Constant(2, s.mu_v);
    const double at_mean = log_latent_variance_density(s, data, hp);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      ModelState other = s;
      other.w[0] += rng.uniform(-1.0, 1.0);
      other.w[1] += rng.uniform(-1.0, 1.0);
      CHECK(log_latent_variance_density(other, data, hp) <= at_mean + 1e-12);
    }
  }

  SUBCASE("two-point case against the dense oracle") {
    Eigen::VectorXd y(2);
    y << 0.5, -0.5;
    const TrainingSet data = worked_data(y);
    const ModelState s = worked_state();
    // R12 = 0.9^(16*0.0625) = 0.9
    Eigen::MatrixXd r(2, 2);
    r << 1.0, 0.9, 0.9, 1.0;
    const double expected = dense_mvn_logpdf(
        s.w, Eigen::VectorXd::Constant(2, s.mu_v), s.sigma2_v * r);
    CHECK(log_latent_variance_density(s, data, hp) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("log_prior support boundaries") {
  HyperParams hp;
  ModelState s = worked_state();

  SUBCASE("rho_l = rho_g is outside the support") {
    s.rho_l[0] = s.rho_g[0];
    CHECK(log_prior_static(s, hp) == kNegInf);
  }
  SUBCASE("omega outside its interval") {
    s.omega = 0.49;
    CHECK(log_prior_static(s, hp) == kNegInf);
    s.omega = 1.01;
    CHECK(log_prior_static(s, hp) == kNegInf);
  }
  SUBCASE("nugget disabled pins sigma2_eps at zero") {
    hp.include_nugget = false;
    CHECK(log_prior_static(s, hp) == kNegInf);
    s.sigma2_eps = 0.0;
    CHECK(std::isfinite(log_prior_static(s, hp)));
  }
}

TEST_CASE("log_posterior composes its parts and short-circuits") {
  HyperParams hp;
  Eigen::VectorXd y(2);
  y << 0.5, -0.5;
  const TrainingSet data = worked_data(y);
  const ModelState s = worked_state();

  const double expected =
      log_likelihood(s, data, hp) + log_prior_static(s, hp) +
      log_latent_variance_density(s, data, hp);
  CHECK(log_posterior(s, data, hp) == doctest::Approx(expected).epsilon(1e-12));

  ModelState bad = s;
  bad.rho_l[0] = 0.95;  // above rho_g
  CHECK(log_posterior(bad, data, hp) == kNegInf);
}

TEST_CASE("posterior is finite on prior draws (support closure)") {
  HyperParams hp;
  Eigen::MatrixXd x(6, 2);
  Rng rng(77);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.uniform();
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y[i] = rng.uniform(-1.5, 1.5);
  const TrainingSet data = make_unit_set(x, y);

  for (int trial = 0; trial < 1000; ++trial) {
    const ModelState s = testing::sample_prior_state(data, hp, rng);
    CHECK(std::isfinite(log_posterior(s, data, hp)));
  }
}

TEST_CASE("constant-variance, omega = 1 matches a stationary GP density") {
  HyperParams hp;
  Rng rng(123);
  Eigen::MatrixXd x(7, 1);
  for (int i = 0; i < 7; ++i) x(i, 0) = i / 6.0;
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) y[i] = rng.uniform(-1.0, 1.0);
  const TrainingSet data = make_unit_set(x, y);

  ModelState s = worked_state();
  const double c = 1.7;
  s.omega = 1.0;
  s.beta0 = 0.3;
  s.sigma2_eps = 0.05;
  s.rho_g = Eigen::VectorXd::Constant(1, 0.8);
  s.rho_l = Eigen::VectorXd::Constant(1, 0.4);
  s.w = Eigen::VectorXd::Constant(7, std::log(c));

  Eigen::MatrixXd cov(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const double h = x(i, 0) - x(j, 0);
      cov(i, j) = c * std::pow(0.8, 16.0 * h * h) + (i == j ? 0.05 : 0.0);
    }
  const double expected = dense_mvn_logpdf(y, Eigen::VectorXd::Constant(7, 0.3), cov);
  CHECK(log_likelihood(s, data, hp) == doctest::Approx(expected).epsilon(1e-8));
}
