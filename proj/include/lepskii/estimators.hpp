#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

#include "lepskii/kernels.hpp"

namespace lepskii {

enum class FilterKind { Tikhonov, SpectralCutoff, Landweber };

/// Spectral filter g_lambda. Qualification is metadata only; infinite
/// qualification is encoded as kInfiniteQualification.
struct FilterMethod {
  FilterKind kind = FilterKind::Tikhonov;

  static constexpr double kInfiniteQualification = 1e9;

  double qualification() const {
    return kind == FilterKind::Tikhonov ? 1.0 : kInfiniteQualification;
  }
  friend bool operator==(FilterMethod, FilterMethod) = default;
};

inline constexpr FilterMethod kTikhonov{FilterKind::Tikhonov};
inline constexpr FilterMethod kSpectralCutoff{FilterKind::SpectralCutoff};
inline constexpr FilterMethod kLandweber{FilterKind::Landweber};

std::string_view to_string(FilterMethod m);
FilterMethod parse_filter(std::string_view name);

/// Number of Landweber iterations associated with lambda: ceil(1 / lambda).
long landweber_steps(double lambda);

double filter_value(FilterMethod m, double lambda, double t);

struct EstimatorCoefficients {
  Eigen::VectorXd c;
  double lambda = 0.0;
  FilterMethod method;
};

/// c = g_lambda(G) y / (n kappa^2).
EstimatorCoefficients fit(const GramSystem& system, std::span<const double> ys, FilterMethod m,
                          double lambda);
EstimatorCoefficients fit(const Dataset& data, const KernelSpec& k, FilterMethod m, double lambda);

/// f(x) = sum_j c_j K(x_j, x).
Eigen::VectorXd predict(const EstimatorCoefficients& e, const KernelSpec& k,
                        std::span<const double> train_xs, std::span<const double> xs_new);

/// ||(G + lambda')^s (f1 - f2)||_H = sqrt(d^T K (G + lambda')^{2s} d), d = c1 - c2.
double weighted_diff_norm(const Eigen::VectorXd& c1, const Eigen::VectorXd& c2,
                          const GramSystem& system, double lambda_prime, double s);

/// Coordinates of a coefficient vector in the stored eigenbasis of G. Null
/// space components never contribute to H-norms, so these suffice for
/// weighted_norm_from_coordinates.
Eigen::VectorXd spectral_coordinates(const GramSystem& system, const Eigen::VectorXd& c);
double weighted_norm_from_coordinates(const GramSystem& system, const Eigen::VectorXd& coords,
                                      double lambda_prime, double s);

}  // namespace lepskii
