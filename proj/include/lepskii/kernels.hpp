#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lepskii/spectral_linalg.hpp"

namespace lepskii {

struct GaussianKernel {
  double bandwidth;
};

/// (offset + x*y)^degree on the interval [-domain_radius, domain_radius].
struct PolynomialKernel {
  int degree;
  double offset;
  double domain_radius;
};

/// K(x, y) = sum_i t_i e_i(x) e_i(y) with the trigonometric basis on [0, 1]:
/// e_1 = 1, e_{2k} = sqrt(2) cos(2 pi k x), e_{2k+1} = sqrt(2) sin(2 pi k x).
struct ExplicitSpectrumKernel {
  Eigen::VectorXd t;
};

class KernelSpec {
 public:
  using Variant = std::variant<GaussianKernel, PolynomialKernel, ExplicitSpectrumKernel>;

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec polynomial(int degree, double offset = 1.0, double domain_radius = 1.0);
  static KernelSpec explicit_spectrum(Eigen::VectorXd t);

  const Variant& variant() const { return variant_; }
  bool has_explicit_spectrum() const {
    return std::holds_alternative<ExplicitSpectrumKernel>(variant_);
  }
  const ExplicitSpectrumKernel* spectrum() const {
    return std::get_if<ExplicitSpectrumKernel>(&variant_);
  }

 private:
  explicit KernelSpec(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// Parses `gaussian:h`, `poly:d[:offset[:radius]]` or `spectrum:b:D`
/// (explicit spectrum t_i = i^-b, i = 1..D).
KernelSpec parse_kernel(std::string_view flag);
std::string describe(const KernelSpec& k);

struct Dataset {
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }
};

void validate(const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Zero-based index into the trigonometric basis.
double trig_basis(Eigen::Index index, double x);
/// n x count matrix of trig_basis(i, x_j).
Eigen::MatrixXd trig_features(std::span<const double> xs, Eigen::Index count);

void check_domain(const KernelSpec& k, double x);
double kernel_eval(const KernelSpec& k, double x, double y);
double kappa_squared(const KernelSpec& k);

SymMatrix gram_matrix(const KernelSpec& k, std::span<const double> xs);
/// G = K / (n kappa^2), the coefficient-space form of the normalized empirical
/// covariance operator.
SymMatrix normalized_gram(const KernelSpec& k, std::span<const double> xs);
/// Rows: query points, columns: training points.
Eigen::MatrixXd cross_kernel(const KernelSpec& k, std::span<const double> train,
                             std::span<const double> query);

/// Evaluates f(x) = sum_j c_j K(x_j, x) at a fixed query set for many
/// coefficient vectors. Explicit-spectrum kernels go through their feature
/// factors instead of the full cross-kernel matrix.
class CrossEvaluator {
 public:
  CrossEvaluator(const KernelSpec& k, std::span<const double> train, std::span<const double> query);
  Eigen::VectorXd apply(const Eigen::VectorXd& c) const;

 private:
  Eigen::MatrixXd query_factor_;  // or the full cross-kernel matrix
  Eigen::MatrixXd train_factor_;  // empty unless factored
};

/// Spectral data shared by every estimator on one design: the decomposition
/// of G and the factor relating it to K (K = scale * G, scale = n kappa^2).
struct GramSystem {
  SpectralDecomposition spectrum;
  double scale = 0.0;
  double kappa2 = 0.0;

  Eigen::Index n() const { return spectrum.dim(); }
};

/// Uses a thin rank-D decomposition for explicit-spectrum kernels with n > D.
GramSystem gram_system(const KernelSpec& k, std::span<const double> xs);
/// Spectrum of G only (length min(n, D) for explicit-spectrum kernels).
Eigen::VectorXd normalized_gram_eigenvalues(const KernelSpec& k, std::span<const double> xs);

}  // namespace lepskii
