#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcgp/kriging.hpp"
#include "bcgp/mcmc.hpp"
#include "bcgp/predict.hpp"
#include "bcgp/testbed.hpp"

namespace py = pybind11;
using namespace bcgp;

namespace {

/// A fitted model: training data, hyperparameters and the production draws.
struct BcgpFit {
  TrainingSet data;
  HyperParams hyper;
  ChainOutput chain;
  std::uint64_t seed = 0;

  py::dict predict(const Eigen::MatrixXd& x_star, double level, std::uint64_t pred_seed,
                   bool keep_samples) const {
    const auto results =
        predict_points(x_star, chain.states, data, hyper, level, pred_seed, keep_samples);
    const auto n = static_cast<Eigen::Index>(results.size());
    Eigen::VectorXd mean(n), draw_mean(n), lo(n), hi(n), g(n), l(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = results[static_cast<std::size_t>(i)];
      mean[i] = r.rb_mean;
      draw_mean[i] = r.draw_mean;
      lo[i] = r.lo;
      hi[i] = r.hi;
      g[i] = r.comp_global;
      l[i] = r.comp_local;
      e[i] = r.comp_error;
    }
    py::dict out;
    out["mean"] = mean;
    out["draw_mean"] = draw_mean;
    out["lo"] = lo;
    out["hi"] = hi;
    out["global"] = g;
    out["local"] = l;
    out["error"] = e;
    if (keep_samples) {
      Eigen::MatrixXd samples(n, static_cast<Eigen::Index>(chain.states.size()));
      for (Eigen::Index i = 0; i < n; ++i)
        samples.row(i) = results[static_cast<std::size_t>(i)].samples.transpose();
      out["samples"] = samples;
    }
    return out;
  }

  py::dict draws() const {
    const auto t = static_cast<Eigen::Index>(chain.states.size());
    const Eigen::Index d = data.d(), n = data.n();
    Eigen::VectorXd beta0(t), omega(t), sigma2_eps(t), mu_v(t), sigma2_v(t);
    Eigen::MatrixXd rho_g(t, d), rho_l(t, d), rho_v(t, d), w(t, n);
    for (Eigen::Index i = 0; i < t; ++i) {
      const ModelState& s = chain.states[static_cast<std::size_t>(i)];
      beta0[i] = s.beta0;
      omega[i] = s.omega;
      sigma2_eps[i] = s.sigma2_eps;
      mu_v[i] = s.mu_v;
      sigma2_v[i] = s.sigma2_v;
      rho_g.row(i) = s.rho_g.transpose();
      rho_l.row(i) = s.rho_l.transpose();
      rho_v.row(i) = s.rho_v.transpose();
      w.row(i) = s.w.transpose();
    }
    py::dict out;
    out["beta0"] = beta0;
    out["omega"] = omega;
    out["rho_g"] = rho_g;
    out["rho_l"] = rho_l;
    out["sigma2_eps"] = sigma2_eps;
    out["mu_v"] = mu_v;
    out["sigma2_v"] = sigma2_v;
    out["rho_v"] = rho_v;
    out["w"] = w;
    return out;
  }

  py::dict acceptance() const {
    py::dict out;
    for (const auto& rec : chain.production_acceptance)
      out[py::str(rec.name)] = py::make_tuple(rec.proposals, rec.accepts, rec.rate());
    return out;
  }
};

BcgpFit fit_bcgp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HyperParams& hyper,
                 const ChainConfig& chain_cfg, std::optional<Eigen::VectorXd> input_lo,
                 std::optional<Eigen::VectorXd> input_hi) {
  BcgpFit fit;
  fit.data = TrainingSet::create(x, y, std::move(input_lo), std::move(input_hi));
  fit.hyper = hyper;
  fit.seed = chain_cfg.seed;
  fit.chain = run_chain(fit.data, fit.hyper, chain_cfg);
  return fit;
}

MeanBasis basis_from_string(const std::string& name) {
  if (name == "constant") return MeanBasis::Constant;
  if (name == "linear") return MeanBasis::Linear;
  if (name == "cubic") return MeanBasis::Cubic;
  throw std::invalid_argument("basis must be constant|linear|cubic");
}

KrigingEstimator estimator_from_string(const std::string& name) {
  if (name == "ml") return KrigingEstimator::MaximumLikelihood;
  if (name == "reml") return KrigingEstimator::Reml;
  throw std::invalid_argument("estimator must be ml|reml");
}

}  // namespace

PYBIND11_MODULE(_bcgp, m) {
  m.doc() = "Bayesian composite Gaussian process emulator";

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("alpha_omega", &HyperParams::alpha_omega)
      .def_readwrite("beta_omega", &HyperParams::beta_omega)
      .def_readwrite("l_omega", &HyperParams::l_omega)
      .def_readwrite("u_omega", &HyperParams::u_omega)
      .def_readwrite("alpha_g", &HyperParams::alpha_g)
      .def_readwrite("beta_g", &HyperParams::beta_g)
      .def_readwrite("alpha_l", &HyperParams::alpha_l)
      .def_readwrite("beta_l", &HyperParams::beta_l)
      .def_readwrite("a_eps", &HyperParams::a_eps)
      .def_readwrite("b_eps", &HyperParams::b_eps)
      .def_readwrite("beta_v", &HyperParams::beta_v)
      .def_readwrite("tau2_v", &HyperParams::tau2_v)
      .def_readwrite("a_sigma2v", &HyperParams::a_sigma2v)
      .def_readwrite("b_sigma2v", &HyperParams::b_sigma2v)
      .def_readwrite("alpha_rhov", &HyperParams::alpha_rhov)
      .def_readwrite("beta_rhov", &HyperParams::beta_rhov)
      .def_readwrite("k_g", &HyperParams::k_g)
      .def_readwrite("k_l", &HyperParams::k_l)
      .def_readwrite("k_v", &HyperParams::k_v)
      .def_readwrite("include_nugget", &HyperParams::include_nugget);

  py::class_<ChainConfig>(m, "ChainConfig")
      .def(py::init<>())
      .def_readwrite("n_adapt", &ChainConfig::n_adapt)
      .def_readwrite("num_updates", &ChainConfig::num_updates)
      .def_readwrite("n_burn", &ChainConfig::n_burn)
      .def_readwrite("n_mcmc", &ChainConfig::n_mcmc)
      .def_readwrite("target_lo", &ChainConfig::target_lo)
      .def_readwrite("target_hi", &ChainConfig::target_hi)
      .def_readwrite("target_c", &ChainConfig::target_c)
      .def_readwrite("tau2_proposal", &ChainConfig::tau2_proposal)
      .def_readwrite("n_prop", &ChainConfig::n_prop)
      .def_readwrite("m", &ChainConfig::m)
      .def_readwrite("small_n_threshold", &ChainConfig::small_n_threshold)
      .def_readwrite("seed", &ChainConfig::seed)
      .def_readwrite("prior_only", &ChainConfig::prior_only);

  py::class_<BcgpFit>(m, "BcgpFit")
      .def("predict", &BcgpFit::predict, py::arg("x_star"), py::arg("level") = 0.95,
           py::arg("seed") = 1000003, py::arg("keep_samples") = false,
           "Posterior predictive summary at new inputs (original units): "
           "Rao-Blackwellized mean, draw mean, interval, decomposition.")
      .def("draws", &BcgpFit::draws, "Production draws of every model unknown.")
      .def("acceptance", &BcgpFit::acceptance,
           "Production-phase acceptance (proposals, accepts, rate) per parameter.")
      .def_property_readonly("n_draws",
                             [](const BcgpFit& f) { return f.chain.states.size(); });

  m.def("fit", &fit_bcgp, py::arg("x"), py::arg("y"), py::arg("hyper") = HyperParams(),
        py::arg("chain") = ChainConfig(), py::arg("input_lo") = std::nullopt,
        py::arg("input_hi") = std::nullopt,
        "Run the Metropolis-within-Gibbs sampler on (x, y) and return the fit.");

  py::class_<KrigingModel>(m, "KrigingModel")
      .def("predict",
           [](const KrigingModel& model, const Eigen::MatrixXd& x_star) {
             Eigen::VectorXd mean(x_star.rows()), var(x_star.rows());
             for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
               const auto [m_i, v_i] = model.predict(x_star.row(i).transpose());
               mean[i] = m_i;
               var[i] = v_i;
             }
             return py::make_tuple(mean, var);
           },
           py::arg("x_star"), "Plug-in BLUP mean and variance, original units.")
      .def_property_readonly("rho", &KrigingModel::rho_hat)
      .def_property_readonly("sigma2", &KrigingModel::sigma2_hat)
      .def_property_readonly("beta", &KrigingModel::beta_hat)
      .def_property_readonly("loglik", &KrigingModel::profile_loglik);

  m.def(
      "fit_kriging",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& basis,
         double nugget, const std::string& estimator, std::optional<Eigen::VectorXd> lo,
         std::optional<Eigen::VectorXd> hi) {
        const TrainingSet data = TrainingSet::create(x, y, std::move(lo), std::move(hi));
        return fit_kriging(data, basis_from_string(basis), nugget,
                           estimator_from_string(estimator));
      },
      py::arg("x"), py::arg("y"), py::arg("basis") = "constant", py::arg("nugget") = 0.0,
      py::arg("estimator") = "ml", py::arg("input_lo") = std::nullopt,
      py::arg("input_hi") = std::nullopt,
      "Universal-kriging baseline with Gaussian correlation.");

  m.def("bjx", py::vectorize(&bjx), py::arg("x"),
        "Non-stationary 1-d test function on [0,1].");
  m.def("wing_weight", &wing_weight, py::arg("x"),
        "Light-aircraft wing weight (lb) from 10 inputs; sweep angle in degrees.");
  m.def("lhs_maximin", &lhs_maximin, py::arg("n"), py::arg("d"), py::arg("seed"),
        py::arg("n_candidates") = 200,
        "Best-of-candidates maximin Latin hypercube in [0,1]^d.");
  m.def("sobol_points", &sobol_points, py::arg("n"), py::arg("d"),
        "First n points of the standard Sobol' sequence in [0,1)^d.");
  m.def("rmspe", &rmspe, py::arg("predictions"), py::arg("truths"));
  m.def("relative_errors", &relative_errors, py::arg("predictions"), py::arg("truths"));
}
