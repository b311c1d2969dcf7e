#include "lepskii/estimators.hpp"

#include <cmath>

namespace lepskii {

std::string_view to_string(FilterMethod m) {
  switch (m.kind) {
    case FilterKind::Tikhonov: return "tikhonov";
    case FilterKind::SpectralCutoff: return "cutoff";
    case FilterKind::Landweber: return "landweber";
  }
  return "unknown";
}

FilterMethod parse_filter(std::string_view name) {
  if (name == "tikhonov") return kTikhonov;
  if (name == "cutoff" || name == "spectral_cutoff") return kSpectralCutoff;
  if (name == "landweber") return kLandweber;
  throw Error(ErrorKind::ParseError, "unknown filter '" + std::string(name) + "'");
}

long landweber_steps(double lambda) {
  const double inverse = 1.0 / lambda;
  // Snap values within round-off of an integer so that 1/0.5 gives 2, not 3.
  const double nearest = std::round(inverse);
  if (std::abs(inverse - nearest) <= 1e-12 * nearest) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(inverse));
}

double filter_value(FilterMethod m, double lambda, double t) {
  require_lambda(lambda, "filter_value");
  switch (m.kind) {
    case FilterKind::Tikhonov:
      return 1.0 / (t + lambda);
    case FilterKind::SpectralCutoff:
      return t >= lambda ? 1.0 / t : 0.0;
    case FilterKind::Landweber: {
      const double steps = double(landweber_steps(lambda));
      if (t <= 0.0) return steps;
      if (t >= 1.0) return 1.0 / t;
      return -std::expm1(steps * std::log1p(-t)) / t;
    }
  }
  return 0.0;
}

EstimatorCoefficients fit(const GramSystem& system, std::span<const double> ys, FilterMethod m,
                          double lambda) {
  require_lambda(lambda, "fit");
  if (static_cast<Eigen::Index>(ys.size()) != system.n()) {
    throw Error(ErrorKind::DimensionMismatch, "fit: response length does not match design");
  }
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  auto g = [&](double t) { return filter_value(m, lambda, t); };
  Eigen::VectorXd c = apply_spectral_function(system.spectrum, g, Eigen::VectorXd(y)) / system.scale;
  return EstimatorCoefficients{std::move(c), lambda, m};
}

EstimatorCoefficients fit(const Dataset& data, const KernelSpec& k, FilterMethod m, double lambda) {
  require_lambda(lambda, "fit");
  validate(data);
  return fit(gram_system(k, data.xs), data.ys, m, lambda);
}

Eigen::VectorXd predict(const EstimatorCoefficients& e, const KernelSpec& k,
                        std::span<const double> train_xs, std::span<const double> xs_new) {
  if (static_cast<Eigen::Index>(train_xs.size()) != e.c.size()) {
    throw Error(ErrorKind::DimensionMismatch, "predict: coefficients do not match training points");
  }
  if (xs_new.empty()) return Eigen::VectorXd();
  return CrossEvaluator(k, train_xs, xs_new).apply(e.c);
}

Eigen::VectorXd spectral_coordinates(const GramSystem& system, const Eigen::VectorXd& c) {
  if (c.size() != system.n()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match design");
  }
  return system.spectrum.vectors.transpose() * c;
}

double weighted_norm_from_coordinates(const GramSystem& system, const Eigen::VectorXd& coords,
                                      double lambda_prime, double s) {
  if (coords.size() != system.spectrum.rank()) {
    throw Error(ErrorKind::DimensionMismatch, "spectral coordinates do not match decomposition");
  }
  if (!(lambda_prime >= 0.0)) {
    throw Error(ErrorKind::InvalidLambda, "weighted norm needs lambda' >= 0");
  }
  const auto& mu = system.spectrum.values;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) <= 0.0) continue;
    sum += mu(i) * std::pow(mu(i) + lambda_prime, 2.0 * s) * coords(i) * coords(i);
  }
  return std::sqrt(system.scale * sum);
}

double weighted_diff_norm(const Eigen::VectorXd& c1, const Eigen::VectorXd& c2,
                          const GramSystem& system, double lambda_prime, double s) {
  if (c1.size() != c2.size()) {
    throw Error(ErrorKind::DimensionMismatch, "weighted_diff_norm: coefficient lengths differ");
  }
  return weighted_norm_from_coordinates(system, spectral_coordinates(system, c1 - c2),
                                        lambda_prime, s);
}

}  // namespace lepskii
