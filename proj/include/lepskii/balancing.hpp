#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "lepskii/estimators.hpp"
#include "lepskii/grid.hpp"

namespace lepskii {

enum class ConstantMode { Practical, Theoretical };

struct BalancingConfig {
  double s = 0.5;
  double eta = 0.1;
  double sigma = 1.0;
  double M_bound = 0.0;
  double c_s = 1.0;
  ConstantMode constant_mode = ConstantMode::Practical;
  double bal_factor = 20.0;
};

void validate(const BalancingConfig& cfg);

/// bal_factor * c_s, times log^2(16 |grid| / eta) in theoretical mode.
double threshold_multiplier(const BalancingConfig& cfg, std::size_t grid_size);

/// Empirical sample-error proxy sigma sqrt(max(N_x, 1) / (n lambda)) + M / (n lambda).
double empirical_sample_error(const Eigen::VectorXd& mu, const BalancingConfig& cfg, long n,
                              double lambda);

struct BalancingDiagnostics {
  double lambda_hat = 0.0;
  std::size_t index_hat = 0;
  std::vector<double> lambdas;
  std::vector<bool> in_jplus;
  /// pairwise_norms(k, j) for j <= k: norm of f^{lambda_k} - f^{lambda_j}
  /// weighted at lambda' = lambda_j. Entries with j > k are unused (zero).
  Eigen::MatrixXd pairwise_norms;
  std::vector<double> thresholds;

  std::vector<double> jplus() const;
};

/// Balancing-principle selection: lambda_k is accepted when every smaller
/// grid value lambda_j satisfies
///   ||(G + lambda_j)^s (f^{lambda_k} - f^{lambda_j})||_H <= T(lambda_j),
/// T(lambda') = multiplier * lambda'^s * empirical_sample_error(lambda');
/// the selected value is the largest accepted one.
BalancingDiagnostics balancing_select(const Grid& grid, std::span<const EstimatorCoefficients> fits,
                                      const GramSystem& system, const BalancingConfig& cfg);

/// Balancing in the s = 1/2 (L2) norm regardless of cfg.s.
BalancingDiagnostics select_one_for_all(const Grid& grid,
                                        std::span<const EstimatorCoefficients> fits,
                                        const GramSystem& system, BalancingConfig cfg);

/// Comparison mode: min(lambda_hat_s, lambda_hat_0).
double select_min_of_two(const Grid& grid, std::span<const EstimatorCoefficients> fits,
                         const GramSystem& system, const BalancingConfig& cfg);

/// Fits every grid value with one filter.
std::vector<EstimatorCoefficients> fit_grid(const GramSystem& system, std::span<const double> ys,
                                            FilterMethod m, const Grid& grid);

/// Residual-based noise estimate from a Tikhonov fit at `lambda`, with
/// N_x(lambda) as degrees of freedom. Not part of the balancing theory, where
/// sigma is known.
double estimate_sigma(const GramSystem& system, std::span<const double> ys, double lambda);

}  // namespace lepskii
