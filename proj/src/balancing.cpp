#include "lepskii/balancing.hpp"

#include <cmath>

#include "lepskii/effdim.hpp"

namespace lepskii {

void validate(const BalancingConfig& cfg) {
  if (!(cfg.s >= 0.0 && cfg.s <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "balancing norm parameter s must lie in [0, 1/2]");
  }
  require_eta(cfg.eta, "balancing");
  if (!(cfg.sigma >= 0.0) || !(cfg.M_bound >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sigma and M must be nonnegative");
  }
  if (!(cfg.c_s > 0.0) || !(cfg.bal_factor > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "c_s and bal_factor must be positive");
  }
}

double threshold_multiplier(const BalancingConfig& cfg, std::size_t grid_size) {
  double multiplier = cfg.bal_factor * cfg.c_s;
  if (cfg.constant_mode == ConstantMode::Theoretical) {
    const double log_term = std::log(16.0 * double(grid_size) / cfg.eta);
    multiplier *= log_term * log_term;
  }
  return multiplier;
}

double empirical_sample_error(const Eigen::VectorXd& mu, const BalancingConfig& cfg, long n,
                              double lambda) {
  const SampleErrorParams params{cfg.sigma, cfg.M_bound, n};
  return sample_error(params, effdim_clamped(empirical_effdim(mu, lambda)), lambda, true);
}

std::vector<double> BalancingDiagnostics::jplus() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (in_jplus[k]) out.push_back(lambdas[k]);
  }
  return out;
}

namespace {

void check_family(const Grid& grid, std::span<const EstimatorCoefficients> fits,
                  const GramSystem& system) {
  if (fits.size() != grid.size()) {
    throw Error(ErrorKind::IncompleteFamily, "expected " + std::to_string(grid.size()) +
                                                 " fits, got " + std::to_string(fits.size()));
  }
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const double lambda = grid.lambdas[k];
    if (std::abs(fits[k].lambda - lambda) > 1e-12 * lambda) {
      throw Error(ErrorKind::IncompleteFamily,
                  "no fit for grid point " + std::to_string(lambda));
    }
    if (fits[k].c.size() != system.n()) {
      throw Error(ErrorKind::DimensionMismatch, "fit length does not match design");
    }
  }
}

}  // namespace

BalancingDiagnostics balancing_select(const Grid& grid, std::span<const EstimatorCoefficients> fits,
                                      const GramSystem& system, const BalancingConfig& cfg) {
  validate(cfg);
  check_family(grid, fits, system);
  const std::size_t size = grid.size();
  const long n = static_cast<long>(system.n());
  const double multiplier = threshold_multiplier(cfg, size);

  BalancingDiagnostics out;
  out.lambdas = grid.lambdas;
  out.thresholds.resize(size);
  for (std::size_t j = 0; j < size; ++j) {
    const double lambda = grid.lambdas[j];
    out.thresholds[j] = multiplier * std::pow(lambda, cfg.s) *
                        empirical_sample_error(system.spectrum.values, cfg, n, lambda);
  }

  std::vector<Eigen::VectorXd> coords;
  coords.reserve(size);
  for (const auto& f : fits) coords.push_back(spectral_coordinates(system, f.c));

  out.pairwise_norms = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  out.in_jplus.assign(size, false);
  for (std::size_t k = 0; k < size; ++k) {
    bool accepted = true;
    for (std::size_t j = 0; j < k; ++j) {
      const double norm =
          weighted_norm_from_coordinates(system, coords[k] - coords[j], grid.lambdas[j], cfg.s);
      out.pairwise_norms(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = norm;
      if (!(norm <= out.thresholds[j])) accepted = false;
    }
    out.in_jplus[k] = accepted;
    if (accepted) out.index_hat = k;
  }
  out.lambda_hat = grid.lambdas[out.index_hat];
  return out;
}

BalancingDiagnostics select_one_for_all(const Grid& grid,
                                        std::span<const EstimatorCoefficients> fits,
                                        const GramSystem& system, BalancingConfig cfg) {
  cfg.s = 0.5;
  return balancing_select(grid, fits, system, cfg);
}

double select_min_of_two(const Grid& grid, std::span<const EstimatorCoefficients> fits,
                         const GramSystem& system, const BalancingConfig& cfg) {
  BalancingConfig zero = cfg;
  zero.s = 0.0;
  return std::min(balancing_select(grid, fits, system, cfg).lambda_hat,
                  balancing_select(grid, fits, system, zero).lambda_hat);
}

std::vector<EstimatorCoefficients> fit_grid(const GramSystem& system, std::span<const double> ys,
                                            FilterMethod m, const Grid& grid) {
  std::vector<EstimatorCoefficients> fits;
  fits.reserve(grid.size());
  for (double lambda : grid.lambdas) fits.push_back(fit(system, ys, m, lambda));
  return fits;
}

double estimate_sigma(const GramSystem& system, std::span<const double> ys, double lambda) {
  const auto n = static_cast<Eigen::Index>(ys.size());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "estimate_sigma needs n >= 2");
  if (n != system.n()) throw Error(ErrorKind::DimensionMismatch, "estimate_sigma: length mismatch");
  const double df = empirical_effdim(system.spectrum.values, lambda);
  if (df >= double(n)) {
    throw Error(ErrorKind::DegenerateFit, "degrees of freedom reach the sample size");
  }
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  // K c = scale G c = G g(G) y, the Tikhonov smoother applied to y.
  auto smoother = [&](double t) { return t / (t + lambda); };
  const Eigen::VectorXd fitted = apply_spectral_function(system.spectrum, smoother, Eigen::VectorXd(y));
  const double rss = (y - fitted).squaredNorm();
  return std::max(std::sqrt(rss / (double(n) - df)), 1e-12);
}

}  // namespace lepskii
