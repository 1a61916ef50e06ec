#include <algorithm>
#include <cmath>
#include <map>

#include <doctest.h>

#include "bcgp/distributions.hpp"
#include "bcgp/mcmc.hpp"
#include "helpers.hpp"

using namespace bcgp;
using bcgp::testing::dense_mvn_logpdf;
using bcgp::testing::make_unit_set;

namespace {

TrainingSet toy_data(int n, std::uint64_t seed = 17) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = (i + 0.5 * rng.uniform()) / n;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(6.0 * x(i, 0)) + 0.1 * rng.normal();
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1));
  y = ((y.array() - mean) / sd).matrix();
  return make_unit_set(x, y);
}

ModelState toy_state(const TrainingSet& data, const HyperParams& hp) {
  ModelState s = ModelState::initial(data.n(), data.d(), hp);
  Rng rng(5);
  for (Eigen::Index i = 0; i < data.n(); ++i) s.w[i] = 0.3 * rng.normal();
  return s;
}

/// Covariance matrix built with explicit pow-loops, independent of the
/// library's exp/log assembly.
Eigen::MatrixXd dense_cov(const TrainingSet& data, const ModelState& s, const HyperParams& hp) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        c(i, i) = std::exp(s.w[i]) + s.sigma2_eps;
        continue;
      }
      double g = 1.0, l = 1.0;
      for (Eigen::Index k = 0; k < data.d(); ++k) {
        const double h = data.x_scaled()(i, k) - data.x_scaled()(j, k);
        g *= std::pow(s.rho_g[k], hp.k_g * h * h);
        l *= std::pow(s.rho_l[k], hp.k_l * h * h);
      }
      c(i, j) = std::exp(0.5 * (s.w[i] + s.w[j])) * (s.omega * g + (1.0 - s.omega) * l);
    }
  return c;
}

Eigen::MatrixXd dense_latent_corr(const TrainingSet& data, const ModelState& s,
                                  const HyperParams& hp) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double g = 1.0;
      for (Eigen::Index k = 0; k < data.d(); ++k) {
        const double h = data.x_scaled()(i, k) - data.x_scaled()(j, k);
        g *= std::pow(s.rho_v[k], hp.k_v * h * h);
      }
      r(i, j) = g;
    }
  return r;
}

/// Fully dense log posterior used by the reference MH trace.
double dense_log_posterior(const ModelState& s, const TrainingSet& data,
                           const HyperParams& hp) {
  if (!s.in_support(hp)) return kNegInf;
  double lp = TruncatedBeta(hp.alpha_omega, hp.beta_omega, hp.l_omega, hp.u_omega)
                  .logpdf(s.omega);
  for (Eigen::Index j = 0; j < s.rho_g.size(); ++j) {
    lp += BetaDist(hp.alpha_g, hp.beta_g).logpdf(s.rho_g[j]);
    lp += TruncatedBeta(hp.alpha_l, hp.beta_l, 0.0, s.rho_g[j]).logpdf(s.rho_l[j]);
    lp += BetaDist(hp.alpha_rhov, hp.beta_rhov).logpdf(s.rho_v[j]);
  }
  if (hp.include_nugget) lp += GammaDist(hp.a_eps, hp.b_eps).logpdf(s.sigma2_eps);
  lp += NormalDist(hp.beta_v, hp.tau2_v).logpdf(s.mu_v);
  lp += InverseGammaDist(hp.a_sigma2v, hp.b_sigma2v).logpdf(s.sigma2_v);
  lp += dense_mvn_logpdf(s.w, Eigen::VectorXd::Constant(data.n(), s.mu_v),
                         s.sigma2_v * dense_latent_corr(data, s, hp));
  lp += dense_mvn_logpdf(data.y(), Eigen::VectorXd::Constant(data.n(), s.beta0),
                         dense_cov(data, s, hp));
  return lp;
}

}  // namespace

TEST_CASE("gibbs_beta0 draws from the dense-formula conditional") {
  HyperParams hp;
  const TrainingSet data = toy_data(3);
  const ModelState s = toy_state(data, hp);

  const Eigen::MatrixXd c = dense_cov(data, s, hp);
  const Eigen::MatrixXd c_inv = c.inverse();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  const double precision = ones.dot(c_inv * ones);
  const double mean = ones.dot(c_inv * data.y()) / precision;

  Rng op_rng(101), ref_rng(101);
  const double drawn = gibbs_beta0(s, data, hp, op_rng);
  const double expected = mean + std::sqrt(1.0 / precision) * ref_rng.normal();
  CHECK(drawn == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("gibbs_beta0 reduces to the sample mean under identity covariance") {
  HyperParams hp;
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;  // distance 1, correlations below vanish
  Eigen::VectorXd y(2);
  y << 0.4, -1.0;
  const TrainingSet data = make_unit_set(x, y);
  ModelState s = ModelState::initial(2, 1, hp);
  s.rho_g = Eigen::VectorXd::Constant(1, 1e-12);
  s.rho_l = Eigen::VectorXd::Constant(1, 1e-13);
  s.sigma2_eps = 0.0;
  s.w.setZero();

  Rng op_rng(7), ref_rng(7);
  const double drawn = gibbs_beta0(s, data, hp, op_rng);
  const double expected = y.mean() + std::sqrt(0.5) * ref_rng.normal();
  CHECK(drawn == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gibbs_mu_v matches the closed form at R = I") {
  HyperParams hp;
  hp.tau2_v = 1.0;
  hp.beta_v = 0.0;
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const TrainingSet data = make_unit_set(x, Eigen::VectorXd::Zero(2));
  ModelState s = ModelState::initial(2, 1, hp);
  s.rho_v = Eigen::VectorXd::Constant(1, 1e-12);
  s.sigma2_v = 1.0;
  s.w.setZero();

  Rng op_rng(11), ref_rng(11);
  const double drawn = gibbs_mu_v(s, data, hp, op_rng);
  const double v = 1.0 / (1.0 + 2.0);  // 1/(1/tau2 + n/sigma2_v)
  const double expected = 0.0 + std::sqrt(v) * ref_rng.normal();
  CHECK(drawn == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gibbs_mu_v single point at the prior mean keeps the prior mean centered") {
  HyperParams hp;
  const TrainingSet data =
      make_unit_set(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  ModelState s = ModelState::initial(1, 1, hp);
  s.w = Eigen::VectorXd::Constant(1, hp.beta_v);
  // m = v*(beta_v/tau2 + w1/sigma2_v) = beta_v regardless of the variances
  Rng op_rng(13), ref_rng(13);
  const double v = 1.0 / (1.0 / hp.tau2_v + 1.0 / s.sigma2_v);
  const double drawn = gibbs_mu_v(s, data, hp, op_rng);
  const double expected = hp.beta_v + std::sqrt(v) * ref_rng.normal();
  CHECK(drawn == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gibbs_sigma2_v: zero quadratic form draws from IG(n/2 + a, b)") {
  HyperParams hp;
  const TrainingSet data = toy_data(3);
  ModelState s = toy_state(data, hp);
  s.mu_v = 0.25;
  s.w = Eigen::VectorXd::Constant(3, 0.25);

  Rng op_rng(19), ref_rng(19);
  const double drawn = gibbs_sigma2_v(s, data, hp, op_rng);
  const double expected =
      InverseGammaDist(1.5 + hp.a_sigma2v, hp.b_sigma2v).sample(ref_rng);
  CHECK(drawn == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gibbs moments match a grid integration of the joint (3-point toy)") {
  HyperParams hp;
  const TrainingSet data = toy_data(3, 23);
  ModelState s = toy_state(data, hp);
  s.mu_v = -0.2;
  s.sigma2_v = 0.3;
  s.w << 0.4, -0.5, 0.1;

  const Eigen::MatrixXd r = dense_latent_corr(data, s, hp);
  const Eigen::VectorXd mu1 = Eigen::VectorXd::Constant(3, 1.0);

  SUBCASE("sigma2_v") {
    // Grid the unnormalized conditional p(W | mu, s, rho) p(s) on a log grid.
    const int grid_n = 4001;
    double z0 = 0.0, z1 = 0.0, z2 = 0.0;
    for (int i = 0; i < grid_n; ++i) {
      const double t = -9.0 + 12.0 * i / (grid_n - 1.0);  // log s
      const double sv = std::exp(t);
      const double f =
          std::exp(dense_mvn_logpdf(s.w, s.mu_v * mu1, sv * r) +
                   InverseGammaDist(hp.a_sigma2v, hp.b_sigma2v).logpdf(sv)) *
          sv;  // Jacobian of the log grid
      z0 += f;
      z1 += f * sv;
      z2 += f * sv * sv;
    }
    const double oracle_mean = z1 / z0;
    const double oracle_sd = std::sqrt(z2 / z0 - oracle_mean * oracle_mean);

    Rng rng(301);
    const int draws = 20000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double v = gibbs_sigma2_v(s, data, hp, rng);
      acc += v;
      acc2 += v * v;
    }
    const double mc_mean = acc / draws;
    const double mc_sd = std::sqrt(acc2 / draws - mc_mean * mc_mean);
    CHECK(mc_mean == doctest::Approx(oracle_mean).epsilon(0.03));
    CHECK(mc_sd == doctest::Approx(oracle_sd).epsilon(0.05));
  }

  SUBCASE("mu_v") {
    const int grid_n = 8001;
    double z0 = 0.0, z1 = 0.0, z2 = 0.0;
    for (int i = 0; i < grid_n; ++i) {
      const double mu = -4.0 + 8.0 * i / (grid_n - 1.0);
      const double f = std::exp(dense_mvn_logpdf(s.w, mu * mu1, s.sigma2_v * r) +
                                NormalDist(hp.beta_v, hp.tau2_v).logpdf(mu));
      z0 += f;
      z1 += f * mu;
      z2 += f * mu * mu;
    }
    const double oracle_mean = z1 / z0;
    const double oracle_sd = std::sqrt(z2 / z0 - oracle_mean * oracle_mean);

    Rng rng(302);
    const int draws = 20000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double v = gibbs_mu_v(s, data, hp, rng);
      acc += v;
      acc2 += v * v;
    }
    const double mc_mean = acc / draws;
    const double mc_sd = std::sqrt(acc2 / draws - mc_mean * mc_mean);
    CHECK(mc_mean == doctest::Approx(oracle_mean).epsilon(0.03));
    CHECK(mc_sd == doctest::Approx(oracle_sd).epsilon(0.05));
  }
}

TEST_CASE("mh_uniform_step rejects proposals outside the prior support") {
  HyperParams hp;
  const TrainingSet data = toy_data(4);
  ModelState s = toy_state(data, hp);
  s.rho_g[0] = 0.7;
  s.rho_l[0] = 0.699;  // any upward proposal crosses rho_g

  Rng probe(41);
  const double width = 0.2;
  const double proposed = probe.uniform(s.rho_l[0] - width, s.rho_l[0] + width);
  Rng rng(41);
  const MhOutcome out = mh_uniform_step(MhParam::RhoL, 0, width, s, data, hp, rng);
  if (proposed >= s.rho_g[0] || proposed <= 0.0) {
    CHECK_FALSE(out.accepted);
    CHECK(out.value == s.rho_l[0]);
  } else {
    CHECK(out.value == (out.accepted ? proposed : s.rho_l[0]));
  }
}

TEST_CASE("mh steps reproduce an independently scripted reference trace") {
  HyperParams hp;
  const TrainingSet data = toy_data(5, 29);
  ModelState lib_state = toy_state(data, hp);
  ModelState ref_state = lib_state;

  Rng lib_rng(999), ref_rng(999);
  const double width = 0.08;
  int accepts = 0;
  for (int step = 0; step < 30; ++step) {
    const MhParam params[] = {MhParam::Omega, MhParam::RhoG, MhParam::RhoL,
                              MhParam::Sigma2Eps, MhParam::RhoV};
    const MhParam p = params[step % 5];

    // library step
    const MhOutcome out = mh_uniform_step(p, 0, width, lib_state, data, hp, lib_rng);
    switch (p) {
      case MhParam::Omega: lib_state.omega = out.value; break;
      case MhParam::RhoG: lib_state.rho_g[0] = out.value; break;
      case MhParam::RhoL: lib_state.rho_l[0] = out.value; break;
      case MhParam::Sigma2Eps: lib_state.sigma2_eps = out.value; break;
      case MhParam::RhoV: lib_state.rho_v[0] = out.value; break;
    }

    // scripted reference step on the dense posterior
    double* field = nullptr;
    switch (p) {
      case MhParam::Omega: field = &ref_state.omega; break;
      case MhParam::RhoG: field = &ref_state.rho_g[0]; break;
      case MhParam::RhoL: field = &ref_state.rho_l[0]; break;
      case MhParam::Sigma2Eps: field = &ref_state.sigma2_eps; break;
      case MhParam::RhoV: field = &ref_state.rho_v[0]; break;
    }
    const double current = *field;
    const double proposed = ref_rng.uniform(current - width, current + width);
    ModelState trial = ref_state;
    switch (p) {
      case MhParam::Omega: trial.omega = proposed; break;
      case MhParam::RhoG: trial.rho_g[0] = proposed; break;
      case MhParam::RhoL: trial.rho_l[0] = proposed; break;
      case MhParam::Sigma2Eps: trial.sigma2_eps = proposed; break;
      case MhParam::RhoV: trial.rho_v[0] = proposed; break;
    }
    const double log_ratio =
        dense_log_posterior(trial, data, hp) - dense_log_posterior(ref_state, data, hp);
    const double u = ref_rng.uniform();
    const bool accept = std::log(u) < log_ratio;
    if (accept) ref_state = trial;

    CHECK(out.accepted == accept);
    CHECK(out.value == doctest::Approx(accept ? proposed : current).epsilon(1e-14));
    accepts += out.accepted ? 1 : 0;
  }
  CHECK(accepts > 0);  // the trace exercises both branches
}

TEST_CASE("update_v_small") {
  HyperParams hp;
  const TrainingSet data = toy_data(4, 31);
  ModelState s = toy_state(data, hp);
  ChainConfig cfg;

  SUBCASE("degenerate proposal keeps the state") {
    cfg.tau2_proposal = 0.0;
    Rng rng(55);
    const Eigen::VectorXd w = update_v_small(s, data, hp, cfg, rng);
    CHECK((w - s.w).norm() == 0.0);
  }

  SUBCASE("scalar case reduces to the textbook ratio") {
    const TrainingSet one =
        make_unit_set(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 0.6));
    ModelState sc = ModelState::initial(1, 1, hp);
    sc.beta0 = 0.2;
    sc.sigma2_eps = 0.05;
    sc.mu_v = -0.1;
    sc.sigma2_v = 0.4;
    sc.w = Eigen::VectorXd::Constant(1, 0.3);
    cfg.tau2_proposal = 0.5;

    Rng op_rng(77), ref_rng(77);
    const Eigen::VectorXd w_new = update_v_small(sc, one, hp, cfg, op_rng);

    const double z = ref_rng.normal();
    const double w_prop = sc.w[0] + std::sqrt(cfg.tau2_proposal * sc.sigma2_v) * z;
    auto lik = [&](double w) {
      return NormalDist(sc.beta0, std::exp(w) + sc.sigma2_eps).logpdf(0.6);
    };
    auto prior = [&](double w) { return NormalDist(sc.mu_v, sc.sigma2_v).logpdf(w); };
    const double log_p = lik(w_prop) - lik(sc.w[0]) + prior(w_prop) - prior(sc.w[0]);
    const double u = ref_rng.uniform();
    const double expected = std::log(u) < log_p ? w_prop : sc.w[0];
    CHECK(w_new[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("update_v_clustered") {
  HyperParams hp;
  ChainConfig cfg;

  SUBCASE("forced rejection leaves V unchanged") {
    const TrainingSet data = toy_data(25, 37);
    ModelState s = toy_state(data, hp);
    cfg.m = 1;
    cfg.tau2_proposal = 1e4;  // wild proposals, rejected under this seed
    Rng rng(91);
    const Eigen::VectorXd w = update_v_clustered(s, data, hp, cfg, rng);
    CHECK((w - s.w).norm() == 0.0);
  }

  SUBCASE("n_prop = n collapses to the full-vector proposal") {
    // Sorted 1-d sites and a focal point below all of them make the
    // nearest-point ordering the identity, so the block update must equal
    // the full-vector update built by hand from the same stream.
    Eigen::MatrixXd x(6, 1);
    x << 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
    Eigen::VectorXd y(6);
    y << 0.1, -0.4, 0.8, 0.2, -0.6, 0.5;
    const TrainingSet data = make_unit_set(x, y);
    ModelState s = ModelState::initial(6, 1, hp);
    cfg.m = 1;
    cfg.n_prop = 6;
    cfg.tau2_proposal = 0.3;

    // find a seed whose first uniform lands below every site
    std::uint64_t seed = 0;
    for (std::uint64_t candidate = 0; candidate < 200; ++candidate) {
      Rng probe(candidate);
      if (probe.uniform() < 0.25) {
        seed = candidate;
        break;
      }
    }
    Rng op_rng(seed), ref_rng(seed);
    REQUIRE(Rng(seed).uniform() < 0.25);
    const Eigen::VectorXd w_new = update_v_clustered(s, data, hp, cfg, op_rng);

    ref_rng.uniform();  // the focal point
    const CovMatrix r = CovMatrix::factor(corr_matrix(data.sq_dist(), s.rho_v, hp.k_v));
    Eigen::VectorXd z(6);
    for (int i = 0; i < 6; ++i) z[i] = ref_rng.normal();
    const Eigen::VectorXd w_prop =
        s.w + std::sqrt(cfg.tau2_proposal * s.sigma2_v) * (r.cholesky_lower() * z);
    ModelState trial = s;
    trial.w = w_prop;
    const double log_ratio =
        log_likelihood(trial, data, hp) - log_likelihood(s, data, hp) +
        log_latent_density_given(r, w_prop, s.mu_v, s.sigma2_v) -
        log_latent_density_given(r, s.w, s.mu_v, s.sigma2_v);
    const double u = ref_rng.uniform();
    const Eigen::VectorXd expected = std::log(u) < log_ratio ? w_prop : s.w;
    CHECK((w_new - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("calibrate_widths follows the acceptance-rate rule") {
  ChainConfig cfg;
  ProposalWidths w = ProposalWidths::initial(1);
  w.omega = 0.1;
  w.rho_g[0] = 0.2;
  w.rho_l[0] = 0.3;
  w.sigma2_eps = 1e-3;
  w.rho_v[0] = 0.4;

  std::vector<AcceptanceRecord> counts = {
      {"omega", 100, 30},       // 0.30: inside the window, unchanged
      {"rho_g[0]", 100, 50},    // 0.50: grow by 0.50/0.325
      {"rho_l[0]", 100, 10},    // 0.10: shrink by 0.10/0.325
      {"sigma2_eps", 100, 0},   // zero acceptance: fixed 0.3 factor
      {"rho_v[0]", 0, 0},       // no proposals: untouched
      {"v", 100, 100},          // extra counters are ignored by the widths
  };
  const ProposalWidths out = calibrate_widths(w, counts, cfg);
  CHECK(out.omega == doctest::Approx(0.1));
  CHECK(out.rho_g[0] == doctest::Approx(0.2 * 0.50 / 0.325).epsilon(1e-12));
  CHECK(out.rho_l[0] == doctest::Approx(0.3 * 0.10 / 0.325).epsilon(1e-12));
  CHECK(out.sigma2_eps == doctest::Approx(1e-3 * 0.3).epsilon(1e-12));
  CHECK(out.rho_v[0] == doctest::Approx(0.4));
}

TEST_CASE("run_chain: smoke, determinism, and stored-state invariants") {
  HyperParams hp;
  const TrainingSet data = toy_data(8, 43);
  ChainConfig cfg;
  cfg.n_adapt = 20;
  cfg.num_updates = 3;
  cfg.n_burn = 30;
  cfg.n_mcmc = 5;
  cfg.seed = 2024;

  const ChainOutput a = run_chain(data, hp, cfg);
  CHECK(a.states.size() == 5);
  for (const ModelState& s : a.states) {
    CHECK(s.in_support(hp));
    CHECK(s.rho_l[0] < s.rho_g[0]);
    CHECK(s.omega >= hp.l_omega);
    CHECK(s.omega <= hp.u_omega);
  }

  const ChainOutput b = run_chain(data, hp, cfg);
  REQUIRE(b.states.size() == a.states.size());
  for (std::size_t t = 0; t < a.states.size(); ++t) {
    CHECK(a.states[t].beta0 == b.states[t].beta0);
    CHECK(a.states[t].omega == b.states[t].omega);
    CHECK((a.states[t].w - b.states[t].w).norm() == 0.0);
    CHECK((a.states[t].rho_g - b.states[t].rho_g).norm() == 0.0);
  }
  CHECK(a.final_widths.omega == b.final_widths.omega);
}

TEST_CASE("run_chain rejects a zero-density initial state") {
  HyperParams hp;
  const TrainingSet data = toy_data(4, 47);
  ChainConfig cfg;
  ModelState bad = ModelState::initial(4, 1, hp);
  bad.rho_l[0] = 0.99;  // above rho_g: zero prior density
  CHECK_THROWS_AS(run_chain(data, hp, cfg, bad), std::invalid_argument);
}

TEST_CASE("scalar MH satisfies detailed balance on a discretized posterior") {
  HyperParams hp;
  const TrainingSet data = toy_data(3, 53);
  ModelState s = toy_state(data, hp);

  Rng rng(1234);
  const double width = 0.12;
  const int steps = 150000;
  const int bins = 10;
  auto bin_of = [&](double omega) {
    int b = static_cast<int>((omega - hp.l_omega) / (hp.u_omega - hp.l_omega) * bins);
    return std::clamp(b, 0, bins - 1);
  };
  std::map<std::pair<int, int>, long> transitions;
  // burn in the scalar chain first
  for (int i = 0; i < 5000; ++i)
    s.omega = mh_uniform_step(MhParam::Omega, 0, width, s, data, hp, rng).value;
  int prev = bin_of(s.omega);
  for (int i = 0; i < steps; ++i) {
    s.omega = mh_uniform_step(MhParam::Omega, 0, width, s, data, hp, rng).value;
    const int cur = bin_of(s.omega);
    transitions[{prev, cur}]++;
    prev = cur;
  }
  // Reversibility in stationarity: flows a->b and b->a must balance.
  for (int a = 0; a < bins; ++a)
    for (int b = a + 1; b < bins; ++b) {
      const long ab = transitions[{a, b}];
      const long ba = transitions[{b, a}];
      if (ab + ba < 400) continue;
      const double z = std::abs(double(ab) - double(ba)) / std::sqrt(double(ab + ba));
      CHECK(z < 5.0);
    }
}

TEST_CASE("block and full-vector latent updates share a stationary law") {
  // n = 25 with n_prop = 15 block updates versus full-vector updates,
  // holding the other parameters fixed so the comparison isolates the two
  // Step-9 kernels: the per-coordinate stationary marginals of W = log V
  // must agree (two-sample KS). Three input dimensions keep the sites
  // spread out; on a dense 1-d design the interior coordinates of the
  // focal-point kernel mix too slowly for any finite-sample comparison.
  HyperParams hp;
  Rng drng(59);
  Eigen::MatrixXd x(25, 3);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = drng.uniform();
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i)
    y[i] = std::sin(4.0 * x(i, 0)) + x(i, 1) + 0.1 * drng.normal();
  const double ym = y.mean();
  const double ysd = std::sqrt((y.array() - ym).square().sum() / 24);
  y = ((y.array() - ym) / ysd).matrix();
  const TrainingSet data = make_unit_set(x, y);

  ModelState s = ModelState::initial(25, 3, hp);
  s.mu_v = -0.1;
  s.sigma2_v = 0.2;
  s.rho_v = Eigen::VectorXd::Constant(3, 0.6);

  ChainConfig full_cfg;
  full_cfg.small_n_threshold = 100;  // never reached; free functions used below
  ChainConfig block_cfg = full_cfg;
  block_cfg.n_prop = 15;
  block_cfg.m = 8;

  const int iterations = 200000, burn = 5000, thin = 20;
  auto run_scheme = [&](bool block, std::uint64_t seed) {
    Rng rng(seed);
    ModelState state = s;
    std::vector<std::vector<double>> draws(25);
    for (int it = 0; it < burn + iterations; ++it) {
      state.w = block ? update_v_clustered(state, data, hp, block_cfg, rng)
                      : update_v_small(state, data, hp, full_cfg, rng);
      if (it >= burn && (it - burn) % thin == 0)
        for (int c = 0; c < 25; ++c) draws[c].push_back(state.w[c]);
    }
    for (auto& v : draws) std::sort(v.begin(), v.end());
    return draws;
  };

  const auto full = run_scheme(false, 11);
  const auto block = run_scheme(true, 12);

  for (int coord = 0; coord < 25; ++coord) {
    const auto& a = full[coord];
    const auto& b = block[coord];
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] <= b[j]) ++i;
      else ++j;
      d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double crit = 1.9494746 * std::sqrt(2.0 / static_cast<double>(a.size()));
    CHECK(d < crit);
  }
}
