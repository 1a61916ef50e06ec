#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bcgp {

/// Deterministic analytic test function with its input box.
struct TestFunction {
  std::string name;
  int dim = 0;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::function<double(const Eigen::VectorXd&)> eval;

  Eigen::VectorXd evaluate_all(const Eigen::MatrixXd& x) const;
};

/// sin(30(x-0.9)^4) cos(2(x-0.9)) + (x-0.9)/2 on [0,1]: flat-with-wiggles,
/// then a fast rise, then nearly flat.
double bjx(double x);

/// Weight in pounds of a light aircraft wing from 10 geometric/structural
/// inputs (Sw, Wwf, A, Lambda[deg], q, lambda, tc, Nz, Wdg, Wp). The sweep
/// angle is given in degrees and converted to radians internally.
double wing_weight(const Eigen::VectorXd& x);

/// Registry lookup by name: "bjx" or "wingweight".
const TestFunction& test_function(const std::string& name);

/// Best-of-n_candidates random Latin hypercube by maximin interpoint
/// distance, points jittered within strata; deterministic for a fixed seed.
Eigen::MatrixXd lhs_maximin(int n, int d, std::uint64_t seed, int n_candidates = 200);

/// First n points of the Sobol' sequence in [0,1)^d (unscrambled, starting
/// after the all-zeros point).
Eigen::MatrixXd sobol_points(int n, int d);

/// sqrt(mean squared prediction error).
double rmspe(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths);

/// |pred - truth| / |truth| elementwise.
Eigen::VectorXd relative_errors(const Eigen::VectorXd& predictions,
                                const Eigen::VectorXd& truths);

/// Plot-ready five-number-ish summary of values grouped by equal-width bins
/// of one input coordinate (right-closed last bin).
struct BinSummary {
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  long count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

std::vector<BinSummary> group_by_bins(const Eigen::VectorXd& inputs,
                                      const Eigen::VectorXd& values, int n_bins = 8);
std::vector<BinSummary> group_by_bins(const Eigen::VectorXd& inputs,
                                      const Eigen::VectorXd& values, int n_bins, double range_lo,
                                      double range_hi);

}  // namespace bcgp
