#pragma once

#include <functional>
#include <vector>

#include "lepskii/spectral_linalg.hpp"

namespace lepskii {

/// Increasing grid of regularization parameters in (0, 1].
struct Grid {
  std::vector<double> lambdas;
  double q = 0.0;

  std::size_t size() const { return lambdas.size(); }
  double lambda0() const { return lambdas.front(); }
  double lambda_max() const { return lambdas.back(); }

  /// Arbitrary strictly increasing values in (0, 1]; q records the largest ratio.
  static Grid from_values(std::vector<double> values);
};

/// {q^(j-m) : j = 0..m} with m = ceil(log(1/lambda0_target) / log q), so that
/// the top point is exactly 1 and lambda_0 <= lambda0_target.
Grid geometric_grid(double lambda0_target, double q);

/// Root of n lambda = N(lambda) for a decreasing effective-dimension curve.
double lambda0_from_effdim(const std::function<double(double)>& effdim_fn, long n);

/// How the stopping statistic of the downward walk is scaled.
enum class HeuristicScale { SigmaFree, SigmaScaled };

struct HeuristicOptions {
  double threshold = 5.0;
  HeuristicScale scale = HeuristicScale::SigmaFree;
  double sigma = 1.0;  // used only with SigmaScaled
};

/// Walks lambda_j = q^-j (j = 1, 2, ...) and returns the first value where
/// sqrt(max(N_x, 1) / (n lambda_j)) (times sigma when scaled) reaches the
/// threshold.
double heuristic_lambda0(const Eigen::VectorXd& mu, long n, double q, HeuristicOptions options = {});
inline double heuristic_lambda0(const SpectralDecomposition& g, long n, double q,
                                HeuristicOptions options = {}) {
  return heuristic_lambda0(g.values, n, q, options);
}

struct GridConditions {
  bool nlam0_ok = false;
  bool logterm_ok = false;
};

/// n lambda_0 >= 2 and 2 log(4 |grid| / eta) <= sqrt(n lambda_0).
GridConditions validate_grid_conditions(const Grid& g, long n, double eta);

}  // namespace lepskii
