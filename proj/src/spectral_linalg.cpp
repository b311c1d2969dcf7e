#include "lepskii/spectral_linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace lepskii {

void check_symmetric(const SymMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "symmetric matrix must be square with dim >= 1");
  }
  if (!m.allFinite()) throw Error(ErrorKind::NonFinite, "matrix has NaN or Inf entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance * scale) {
        throw Error(ErrorKind::NonSymmetric, "entries (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ") differ beyond tolerance");
      }
    }
  }
}

void clamp_normalized_spectrum(Eigen::VectorXd& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double& mu = values(i);
    if (mu < -kClampTolerance || mu > 1.0 + kClampTolerance) {
      throw Error(ErrorKind::NotPositiveSemidefinite,
                  "normalized Gram eigenvalue " + std::to_string(mu) + " outside [0, 1]");
    }
    mu = std::clamp(mu, 0.0, 1.0);
  }
}

namespace {

bool use_jacobi(Eigen::Index dim, EigenMethod method) {
  switch (method) {
    case EigenMethod::Jacobi: return true;
    case EigenMethod::Tridiagonal: return false;
    case EigenMethod::Automatic: break;
  }
  return dim <= kJacobiMaxDim;
}

// The solver works on the lower triangle; symmetrize so both triangles agree.
SymMatrix symmetrized(const SymMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

SpectralDecomposition sym_eigendecompose(const SymMatrix& m, DecomposeOptions options) {
  check_symmetric(m);
  SpectralDecomposition out;
  if (m.rows() == 1) {
    out.values = Eigen::VectorXd::Constant(1, m(0, 0));
    out.vectors = Eigen::MatrixXd::Identity(1, 1);
  } else if (use_jacobi(m.rows(), options.method)) {
    out = jacobi_eigendecompose(symmetrized(m));
  } else {
    Eigen::SelfAdjointEigenSolver<SymMatrix> solver(symmetrized(m));
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::NonFinite, "tridiagonal QR eigensolver did not converge");
    }
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    detail::sort_descending(out.values, out.vectors);
  }
  if (options.normalized_gram) clamp_normalized_spectrum(out.values);
  return out;
}

Eigen::VectorXd sym_eigenvalues(const SymMatrix& m, DecomposeOptions options) {
  if (use_jacobi(m.rows(), options.method)) return sym_eigendecompose(m, options).values;
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<SymMatrix> solver(symmetrized(m), Eigen::EigenvaluesOnly);
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  if (options.normalized_gram) clamp_normalized_spectrum(values);
  return values;
}

SpectralDecomposition factor_eigendecompose(const Eigen::MatrixXd& factor, bool normalized_gram) {
  if (!factor.allFinite()) throw Error(ErrorKind::NonFinite, "factor has NaN or Inf entries");
  const Eigen::Index n = factor.rows();
  const Eigen::Index r = factor.cols();
  DecomposeOptions options;
  options.normalized_gram = normalized_gram;
  if (r >= n) {
    SymMatrix gram = factor * factor.transpose();
    return sym_eigendecompose(gram, options);
  }

  // F = Q R  =>  F F^T = Q (R R^T) Q^T with Q having orthonormal columns.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(factor);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd upper = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const SymMatrix small = upper * upper.transpose();
  SpectralDecomposition inner = sym_eigendecompose(small, options);
  return SpectralDecomposition{std::move(inner.values), q * inner.vectors};
}

Eigen::VectorXd factor_eigenvalues(const Eigen::MatrixXd& factor, bool normalized_gram) {
  if (!factor.allFinite()) throw Error(ErrorKind::NonFinite, "factor has NaN or Inf entries");
  DecomposeOptions options;
  options.normalized_gram = normalized_gram;
  // F F^T and F^T F share their nonzero spectrum; decompose the smaller one.
  if (factor.cols() < factor.rows()) {
    return sym_eigenvalues(factor.transpose() * factor, options);
  }
  return sym_eigenvalues(factor * factor.transpose(), options);
}

}  // namespace lepskii
