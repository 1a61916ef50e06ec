#include "bcgp/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/random/sobol.hpp>

#include "bcgp/predict.hpp"
#include "bcgp/rng.hpp"

namespace bcgp {

Eigen::VectorXd TestFunction::evaluate_all(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = eval(x.row(i).transpose());
  return out;
}

double bjx(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("bjx: x must lie in [0,1]");
  const double s = x - 0.9;
  return std::sin(30.0 * s * s * s * s) * std::cos(2.0 * s) + 0.5 * s;
}

namespace {

constexpr double kWingLo[10] = {150.0, 220.0, 6.0, -10.0, 16.0, 0.5, 0.08, 2.5, 1700.0, 0.025};
constexpr double kWingHi[10] = {200.0, 300.0, 10.0, 10.0, 45.0, 1.0, 0.18, 6.0, 2500.0, 0.08};

}  // namespace

double wing_weight(const Eigen::VectorXd& x) {
  if (x.size() != 10) throw std::domain_error("wing_weight: expects 10 inputs");
  for (int j = 0; j < 10; ++j)
    if (!(x[j] >= kWingLo[j] && x[j] <= kWingHi[j]))
      throw std::domain_error("wing_weight: input " + std::to_string(j + 1) +
                              " outside its range");
  const double sw = x[0], wwf = x[1], aspect = x[2], sweep_deg = x[3], q = x[4], taper = x[5],
               tc = x[6], nz = x[7], wdg = x[8], wp = x[9];
  const double cos_sweep = std::cos(sweep_deg * M_PI / 180.0);
  return 0.036 * std::pow(sw, 0.758) * std::pow(wwf, 0.0035) *
             std::pow(aspect / (cos_sweep * cos_sweep), 0.6) * std::pow(q, 0.006) *
             std::pow(taper, 0.04) * std::pow(100.0 * tc / cos_sweep, -0.3) *
             std::pow(nz * wdg, 0.49) +
         sw * wp;
}

const TestFunction& test_function(const std::string& name) {
  static const TestFunction bjx_fn = [] {
    TestFunction f;
    f.name = "bjx";
    f.dim = 1;
    f.lo = Eigen::VectorXd::Constant(1, 0.0);
    f.hi = Eigen::VectorXd::Constant(1, 1.0);
    f.eval = [](const Eigen::VectorXd& x) { return bjx(x[0]); };
    return f;
  }();
  static const TestFunction wing_fn = [] {
    TestFunction f;
    f.name = "wingweight";
    f.dim = 10;
    f.lo = Eigen::Map<const Eigen::VectorXd>(kWingLo, 10);
    f.hi = Eigen::Map<const Eigen::VectorXd>(kWingHi, 10);
    f.eval = [](const Eigen::VectorXd& x) { return wing_weight(x); };
    return f;
  }();
  if (name == "bjx") return bjx_fn;
  if (name == "wingweight") return wing_fn;
  throw std::invalid_argument("test_function: unknown function '" + name + "'");
}

Eigen::MatrixXd lhs_maximin(int n, int d, std::uint64_t seed, int n_candidates) {
  if (n < 2) throw std::invalid_argument("lhs_maximin: need n >= 2");
  if (d < 1) throw std::invalid_argument("lhs_maximin: need d >= 1");
  if (n_candidates < 1) throw std::invalid_argument("lhs_maximin: need n_candidates >= 1");
  Rng rng(seed);

  auto random_lhd = [&] {
    Eigen::MatrixXd design(n, d);
    std::vector<int> perm(n);
    for (int j = 0; j < d; ++j) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[static_cast<int>(rng.integer(static_cast<std::uint64_t>(i + 1)))]);
      for (int i = 0; i < n; ++i)
        design(i, j) = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
    }
    return design;
  };

  auto min_sq_dist = [](const Eigen::MatrixXd& design) {
    double best = std::numeric_limits<double>::max();
    for (Eigen::Index a = 0; a < design.rows(); ++a)
      for (Eigen::Index b = a + 1; b < design.rows(); ++b)
        best = std::min(best, (design.row(a) - design.row(b)).squaredNorm());
    return best;
  };

  Eigen::MatrixXd best_design;
  double best_dist = -1.0;
  for (int c = 0; c < n_candidates; ++c) {
    Eigen::MatrixXd candidate = random_lhd();
    const double dist = min_sq_dist(candidate);
    if (dist > best_dist) {
      best_dist = dist;
      best_design = std::move(candidate);
    }
  }
  return best_design;
}

Eigen::MatrixXd sobol_points(int n, int d) {
  if (n < 0) throw std::invalid_argument("sobol_points: need n >= 0");
  if (d < 1) throw std::invalid_argument("sobol_points: need d >= 1");
  try {
    boost::random::sobol engine(static_cast<std::size_t>(d));
    const double denom = static_cast<double>((boost::random::sobol::max)()) + 1.0;
    Eigen::MatrixXd out(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) out(i, j) = static_cast<double>(engine()) / denom;
    return out;
  } catch (const std::range_error&) {
    throw std::invalid_argument("sobol_points: dimension exceeds the direction-number table");
  }
}

double rmspe(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths) {
  if (predictions.size() != truths.size() || predictions.size() == 0)
    throw std::invalid_argument("rmspe: size mismatch or empty input");
  return std::sqrt((predictions - truths).squaredNorm() /
                   static_cast<double>(predictions.size()));
}

Eigen::VectorXd relative_errors(const Eigen::VectorXd& predictions,
                                const Eigen::VectorXd& truths) {
  if (predictions.size() != truths.size() || predictions.size() == 0)
    throw std::invalid_argument("relative_errors: size mismatch or empty input");
  return ((predictions - truths).array().abs() / truths.array().abs()).matrix();
}

std::vector<BinSummary> group_by_bins(const Eigen::VectorXd& inputs,
                                      const Eigen::VectorXd& values, int n_bins) {
  return group_by_bins(inputs, values, n_bins, inputs.minCoeff(), inputs.maxCoeff());
}

std::vector<BinSummary> group_by_bins(const Eigen::VectorXd& inputs,
                                      const Eigen::VectorXd& values, int n_bins, double range_lo,
                                      double range_hi) {
  if (inputs.size() != values.size() || inputs.size() == 0)
    throw std::invalid_argument("group_by_bins: size mismatch or empty input");
  if (n_bins < 1) throw std::invalid_argument("group_by_bins: need n_bins >= 1");
  if (!(range_lo <= range_hi)) throw std::invalid_argument("group_by_bins: bad range");

  const double width =
      (range_hi > range_lo) ? (range_hi - range_lo) / n_bins : 1.0;
  std::vector<std::vector<double>> members(static_cast<std::size_t>(n_bins));
  for (Eigen::Index i = 0; i < inputs.size(); ++i) {
    int b = static_cast<int>(std::floor((inputs[i] - range_lo) / width));
    b = std::clamp(b, 0, n_bins - 1);  // right-closed last bin
    members[static_cast<std::size_t>(b)].push_back(values[i]);
  }

  std::vector<BinSummary> out(static_cast<std::size_t>(n_bins));
  for (int b = 0; b < n_bins; ++b) {
    BinSummary& s = out[static_cast<std::size_t>(b)];
    s.bin_lo = range_lo + b * width;
    s.bin_hi = range_lo + (b + 1) * width;
    const auto& vals = members[static_cast<std::size_t>(b)];
    s.count = static_cast<long>(vals.size());
    if (!vals.empty()) {
      const Eigen::VectorXd v =
          Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      s.median = percentile(v, 0.5);
      s.q1 = percentile(v, 0.25);
      s.q3 = percentile(v, 0.75);
    } else {
      s.median = s.q1 = s.q3 = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace bcgp
