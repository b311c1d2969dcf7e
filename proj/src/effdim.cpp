#include "lepskii/effdim.hpp"

#include <cmath>

namespace lepskii {

double empirical_effdim(const Eigen::VectorXd& mu, double lambda) {
  require_lambda(lambda, "empirical_effdim");
  return (mu.array() / (mu.array() + lambda)).sum();
}

double model_effdim(const Eigen::VectorXd& t_bar, double lambda) {
  require_lambda(lambda, "model_effdim");
  if (t_bar.size() == 0) throw Error(ErrorKind::EmptySpectrum, "model spectrum is empty");
  return (t_bar.array() / (t_bar.array() + lambda)).sum();
}

double sample_error(const SampleErrorParams& p, double effdim_clamped_value, double lambda,
                    bool include_remainder) {
  require_lambda(lambda, "sample_error");
  const double n_lambda = double(p.n) * lambda;
  double value = p.sigma * std::sqrt(effdim_clamped_value / n_lambda);
  if (include_remainder) value += p.M_bound / n_lambda;
  return value;
}

TwoSidedCheck two_sided_check(double N_model, double N_emp, long n, double lambda, double eta) {
  require_eta(eta, "two_sided_check");
  TwoSidedCheck out;
  out.delta = 2.0 * std::log(4.0 / eta) / std::sqrt(double(n) * lambda);
  const double root_model = std::sqrt(effdim_clamped(N_model));
  const double root_emp = std::sqrt(effdim_clamped(N_emp));
  const double upper_factor = 1.0 + 4.0 * std::max(std::sqrt(out.delta), out.delta * out.delta);
  out.general_holds =
      root_model <= (1.0 + 4.0 * out.delta) * root_emp && root_emp <= upper_factor * root_model;
  out.factor5_applicable = out.delta <= 1.0;
  out.factor5_holds = root_model / 5.0 <= root_emp && root_emp <= 5.0 * root_model;
  return out;
}

}  // namespace lepskii
