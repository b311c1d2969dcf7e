#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "lepskii/error.hpp"

namespace lepskii {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense symmetric matrix in coefficient coordinates.
using SymMatrix = Eigen::MatrixXd;

/// Eigenpairs of a symmetric positive semi-definite matrix, sorted by
/// descending eigenvalue.
///
/// A decomposition may be thin: `vectors` is dim x rank with rank < dim. The
/// orthogonal complement of the stored columns is then an eigenspace for the
/// eigenvalue 0. Full decompositions have rank == dim.
template <typename Scalar>
struct SpectralDecompositionT {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index rank() const { return values.size(); }
  bool is_thin() const { return rank() < dim(); }
};

using SpectralDecomposition = SpectralDecompositionT<double>;

enum class EigenMethod { Automatic, Jacobi, Tridiagonal };

struct DecomposeOptions {
  /// The matrix is a normalized Gram matrix: its spectrum must lie in [0, 1]
  /// up to round-off and is clamped there.
  bool normalized_gram = false;
  EigenMethod method = EigenMethod::Automatic;
};

/// Dimension at or below which EigenMethod::Automatic uses Jacobi rotations.
inline constexpr Eigen::Index kJacobiMaxDim = 128;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kClampTolerance = 1e-9;

struct JacobiControl {
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

namespace detail {

template <typename Scalar>
void sort_descending(VectorX<Scalar>& values, MatrixX<Scalar>& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  VectorX<Scalar> sorted_values(values.size());
  MatrixX<Scalar> sorted_vectors(vectors.rows(), vectors.cols());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    sorted_values(k) = values(order[static_cast<std::size_t>(k)]);
    sorted_vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

template <typename Derived>
typename Derived::Scalar off_diagonal_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar sum(0);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition. Sweeps over the strict upper triangle
/// until the off-diagonal Frobenius norm drops below
/// `relative_tolerance * ||A||_F`.
template <typename Derived>
SpectralDecompositionT<typename Derived::Scalar> jacobi_eigendecompose(
    const Eigen::MatrixBase<Derived>& input, JacobiControl control = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = input.rows();
  MatrixX<Scalar> a = input;
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  const Scalar target = Scalar(control.relative_tolerance) * a.norm();
  for (int sweep = 0; sweep < control.max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= target) break;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
      }
    }
  }

  SpectralDecompositionT<Scalar> out{a.diagonal(), std::move(v)};
  detail::sort_descending(out.values, out.vectors);
  return out;
}

/// Throws NonFinite / NonSymmetric when `m` violates the SymMatrix invariants.
void check_symmetric(const SymMatrix& m);

/// Clamps a normalized-Gram spectrum to [0, 1]; values outside
/// [-kClampTolerance, 1 + kClampTolerance] raise NotPositiveSemidefinite.
void clamp_normalized_spectrum(Eigen::VectorXd& values);

SpectralDecomposition sym_eigendecompose(const SymMatrix& m, DecomposeOptions options = {});

/// Eigenvalues only, descending.
Eigen::VectorXd sym_eigenvalues(const SymMatrix& m, DecomposeOptions options = {});

/// Decomposition of F * F^T for an n x r factor F. When r < n the result is
/// thin (rank r) and is computed from a QR factorization of F plus an r x r
/// eigenproblem.
SpectralDecomposition factor_eigendecompose(const Eigen::MatrixXd& factor,
                                            bool normalized_gram = false);

/// Nonzero-capable eigenvalues of F * F^T (length min(n, r)), descending.
Eigen::VectorXd factor_eigenvalues(const Eigen::MatrixXd& factor, bool normalized_gram = false);

/// V * diag(phi(mu)) * V^T, including phi(0) on the implicit null space of a
/// thin decomposition.
template <typename Fn>
SymMatrix apply_spectral_function(const SpectralDecomposition& d, Fn&& phi) {
  Eigen::VectorXd mapped(d.rank());
  for (Eigen::Index i = 0; i < d.rank(); ++i) {
    mapped(i) = phi(d.values(i));
    if (!std::isfinite(mapped(i))) {
      throw Error(ErrorKind::NonFinite, "apply_spectral_function: phi(mu_" + std::to_string(i) +
                                            ") is not finite");
    }
  }
  SymMatrix out = d.vectors * mapped.asDiagonal() * d.vectors.transpose();
  if (d.is_thin()) {
    const double at_zero = phi(0.0);
    if (!std::isfinite(at_zero)) {
      throw Error(ErrorKind::NonFinite, "apply_spectral_function: phi(0) is not finite");
    }
    SymMatrix projector = -d.vectors * d.vectors.transpose();
    projector.diagonal().array() += 1.0;
    out += at_zero * projector;
  }
  return out;
}

/// Applies V * diag(phi(mu)) * V^T to a vector without forming the matrix.
template <typename Fn>
Eigen::VectorXd apply_spectral_function(const SpectralDecomposition& d, Fn&& phi,
                                        const Eigen::VectorXd& x) {
  const Eigen::VectorXd coords = d.vectors.transpose() * x;
  Eigen::VectorXd scaled(d.rank());
  for (Eigen::Index i = 0; i < d.rank(); ++i) scaled(i) = phi(d.values(i)) * coords(i);
  Eigen::VectorXd out = d.vectors * scaled;
  if (d.is_thin()) out += phi(0.0) * (x - d.vectors * coords);
  return out;
}

}  // namespace lepskii
