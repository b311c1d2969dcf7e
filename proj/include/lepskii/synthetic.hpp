#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "lepskii/effdim.hpp"
#include "lepskii/grid.hpp"
#include "lepskii/kernels.hpp"

namespace lepskii {

/// f = R * Bbar^r h.
struct HolderSource {
  double r = 0.5;
  double R = 1.0;
};

/// f = A(Bbar) h for an increasing index function with A(0+) = 0.
struct IndexFunctionSource {
  std::function<double(double)> A;
  std::string name;
};

/// Parses `power:r[:R]` (A(t) = R t^r) or `log:p` (A(t) = log(e/t)^-p).
IndexFunctionSource parse_index_function(const std::string& spec);

using SourceCondition = std::variant<HolderSource, IndexFunctionSource>;

struct NoiseModel {
  double sigma = 0.0;
  double M_bound = 0.0;
};

/// Regression problem on [0, 1] with uniform marginal and an explicit
/// trigonometric-basis spectrum. The target is f = sum_i a_i phi_i in the
/// H-orthonormal eigenbasis phi_i = sqrt(kappa^2 tbar_i) e_i.
struct SyntheticModel {
  Eigen::VectorXd t_bar;
  double kappa2 = 1.0;
  SourceCondition source = HolderSource{};
  Eigen::VectorXd h;
  NoiseModel noise;
  std::optional<double> b_exponent;

  Eigen::Index dim() const { return t_bar.size(); }
  KernelSpec kernel() const;
  Eigen::VectorXd target_coefficients() const;
  double target(double x) const;
};

enum class SourceShape { SingleMode, Spread };

Eigen::VectorXd source_profile(SourceShape shape, Eigen::Index dim);

/// t_i = i^-b (i = 1..D), kappa^2 = t_1 + 2 sum_{i>=2} t_i, tbar = t / kappa^2.
SyntheticModel make_polynomial_model(double b, Eigen::Index dim, SourceCondition source,
                                     NoiseModel noise, SourceShape shape = SourceShape::SingleMode);
/// Custom nonincreasing positive spectrum t (normalized the same way).
SyntheticModel make_custom_model(Eigen::VectorXd t, SourceCondition source, NoiseModel noise,
                                 Eigen::VectorXd h);

void validate(const SyntheticModel& model);

struct SyntheticSample {
  Dataset data;
  Eigen::VectorXd target_coeffs;
};

/// x_j ~ U[0, 1], y_j = f(x_j) + N(0, sigma^2); deterministic in the seed.
SyntheticSample generate(const SyntheticModel& model, long n, std::uint64_t seed);

/// Coefficients of f = sum_j c_j K(x_j, .) in the phi_i basis:
/// ahat_i = sqrt(kappa^2 tbar_i) sum_j c_j e_i(x_j).
Eigen::VectorXd expand_in_model_basis(const SyntheticModel& model, const Eigen::VectorXd& c,
                                      std::span<const double> xs);
/// Same, with precomputed trig features (n x D).
Eigen::VectorXd expand_in_model_basis(const SyntheticModel& model, const Eigen::VectorXd& c,
                                      const Eigen::MatrixXd& features);

/// ||Bbar^s (fhat - f)||_H = sqrt(sum_i tbar_i^{2s} (ahat_i - a_i)^2).
double true_error_norm(const Eigen::VectorXd& est_coeffs, const Eigen::VectorXd& target_coeffs,
                       const Eigen::VectorXd& t_bar, double s);

/// Leading approximation-error bound: R lambda^r or A(lambda).
double approx_error(const SyntheticModel& model, double lambda);

/// Atilde(lambda) = A(lambda) + C / sqrt(n).
struct ApproxErrorOracle {
  std::function<double(double)> A_fn;
  double d2_constant = 0.0;

  double operator()(double lambda, long n) const {
    return A_fn(lambda) + d2_constant / std::sqrt(double(n));
  }
};

ApproxErrorOracle approx_oracle(const SyntheticModel& model, double d2_constant = 0.0);

/// (sigma^2 / (R^2 n))^{b / (2br + b + 1)}.
double oracle_lambda_regular(double r, double b, double sigma, double R, long n);

/// Crossing of an increasing approximation bound and a decreasing sample
/// bound on (0, 1].
double oracle_lambda_balance(const std::function<double(double)>& approx_tilde,
                             const std::function<double(double)>& sample_tilde);
double oracle_lambda_balance(const ApproxErrorOracle& oracle,
                             const std::function<double(double)>& effdim_fn,
                             const SampleErrorParams& params, bool include_remainder = true);

/// psi^{-1}(1 / sqrt(n)) with psi(t) = A(t) t^{(1/b + 1) / 2}.
double oracle_lambda_general(const std::function<double(double)>& A, double b, long n);

/// b (r + s) / (2 b r + b + 1).
double rate_exponent(double r, double b, double s);

/// Largest grid point with Atilde <= Stilde. Requires the grid to bracket the
/// crossing.
double lambda_star(const Grid& grid, const std::function<double(double)>& approx_tilde,
                   const std::function<double(double)>& sample_tilde);

/// Model-oracle versions of Atilde and Stilde for one sample size.
std::function<double(double)> model_approx_tilde(const SyntheticModel& model, long n,
                                                 double d2_constant = 0.0);
std::function<double(double)> model_sample_tilde(const SyntheticModel& model, long n);

}  // namespace lepskii
