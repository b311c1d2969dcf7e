#include "lepskii/grid.hpp"

#include <cmath>

#include "lepskii/effdim.hpp"

namespace lepskii {

Grid Grid::from_values(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "grid is empty");
  double ratio = 1.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    require_lambda(values[j], "grid");
    if (j > 0) {
      if (!(values[j] > values[j - 1])) {
        throw Error(ErrorKind::InvalidArgument, "grid values must be strictly increasing");
      }
      ratio = std::max(ratio, values[j] / values[j - 1]);
    }
  }
  return Grid{std::move(values), ratio};
}

Grid geometric_grid(double lambda0_target, double q) {
  if (!(q > 1.0) || !std::isfinite(q)) {
    throw Error(ErrorKind::InvalidRatio, "grid ratio q must exceed 1");
  }
  if (!(lambda0_target > 0.0 && lambda0_target < 1.0)) {
    throw Error(ErrorKind::InvalidLambda0, "lambda0 target must lie in (0, 1)");
  }
  const double exact = std::log(1.0 / lambda0_target) / std::log(q);
  // Exact powers of q (0.5 with q = 2) must not gain a spurious extra point.
  const long m = std::max(1L, static_cast<long>(std::ceil(exact - 1e-10 * std::max(1.0, exact))));
  Grid grid;
  grid.q = q;
  grid.lambdas.resize(static_cast<std::size_t>(m + 1));
  for (long j = 0; j < m; ++j) grid.lambdas[static_cast<std::size_t>(j)] = std::pow(q, double(j - m));
  grid.lambdas.back() = 1.0;
  return grid;
}

double lambda0_from_effdim(const std::function<double(double)>& effdim_fn, long n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "lambda0_from_effdim needs n >= 1");
  auto excess = [&](double lambda) { return double(n) * lambda - effdim_fn(lambda); };
  double lo = 1e-16;
  double hi = 1.0;
  if (excess(lo) > 0.0) {
    throw Error(ErrorKind::NoRoot, "n lambda exceeds N(lambda) already at lambda = 1e-16");
  }
  if (excess(hi) < 0.0) {
    throw Error(ErrorKind::NoRoot, "n lambda stays below N(lambda) on (0, 1]");
  }
  double mid = hi;
  for (int it = 0; it < 200; ++it) {
    mid = std::sqrt(lo * hi);
    const double value = excess(mid);
    if (std::abs(value) <= 1e-10 * double(n) * mid) return mid;
    (value < 0.0 ? lo : hi) = mid;
    if (hi / lo - 1.0 < 1e-15) break;
  }
  return mid;
}

double heuristic_lambda0(const Eigen::VectorXd& mu, long n, double q, HeuristicOptions options) {
  if (!(q > 1.0)) throw Error(ErrorKind::InvalidRatio, "heuristic_lambda0 needs q > 1");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "heuristic_lambda0 needs n >= 1");
  const double floor = std::min(1.0 / (double(n) * double(n)), 1e-3);
  const double factor = options.scale == HeuristicScale::SigmaScaled ? options.sigma : 1.0;
  for (int j = 1;; ++j) {
    const double lambda = std::pow(q, -double(j));
    if (lambda < floor) break;
    const double stat =
        factor * std::sqrt(effdim_clamped(empirical_effdim(mu, lambda)) / (double(n) * lambda));
    if (stat >= options.threshold) return lambda;
  }
  throw Error(ErrorKind::NotReached, "stopping threshold not reached above lambda = " +
                                         std::to_string(floor));
}

GridConditions validate_grid_conditions(const Grid& g, long n, double eta) {
  const double n_lambda0 = double(n) * g.lambda0();
  GridConditions out;
  out.nlam0_ok = n_lambda0 >= 2.0;
  out.logterm_ok = 2.0 * std::log(4.0 * double(g.size()) / eta) <= std::sqrt(n_lambda0);
  return out;
}

}  // namespace lepskii
