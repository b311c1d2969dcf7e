#pragma once

#include <Eigen/Dense>

#include "lepskii/spectral_linalg.hpp"

namespace lepskii {

/// N_x(lambda) = tr((G + lambda)^{-1} G) from the (clamped) spectrum of G.
double empirical_effdim(const Eigen::VectorXd& mu, double lambda);
inline double empirical_effdim(const SpectralDecomposition& g, double lambda) {
  return empirical_effdim(g.values, lambda);
}

/// N(lambda) = sum_i tbar_i / (tbar_i + lambda) over a finite normalized
/// spectrum tbar_i = t_i / kappa^2.
double model_effdim(const Eigen::VectorXd& t_bar, double lambda);

/// max(N, 1).
inline double effdim_clamped(double value) { return value < 1.0 ? 1.0 : value; }

struct SampleErrorParams {
  double sigma = 0.0;
  double M_bound = 0.0;
  long n = 1;
};

/// sigma sqrt(Ntilde / (n lambda)), plus M / (n lambda) when the remainder is
/// included.
double sample_error(const SampleErrorParams& p, double effdim_clamped_value, double lambda,
                    bool include_remainder);

struct TwoSidedCheck {
  double delta = 0.0;
  bool general_holds = false;
  bool factor5_applicable = false;
  bool factor5_holds = false;
};

/// delta = 2 log(4/eta) / sqrt(n lambda) and the two forms of the two-sided
/// comparison between sqrt(max(N, 1)) and sqrt(max(N_x, 1)).
TwoSidedCheck two_sided_check(double N_model, double N_emp, long n, double lambda, double eta);

}  // namespace lepskii
