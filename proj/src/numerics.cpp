#include "mmshift/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mmshift {

namespace {

void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
  }
}

bool is_exactly_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

// Flip eigenvector signs so the largest-|.| entry is positive; first such
// entry wins on ties.
void apply_sign_convention(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = std::abs(basis(0, j));
    for (Eigen::Index i = 1; i < basis.rows(); ++i) {
      const double a = std::abs(basis(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("SymMatrix: need a square matrix of dim >= 1");
  }
  require_finite(m, "SymMatrix");
  entries_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
  return SymMatrix(Matrix::Zero(dim, dim));
}

SymMatrix SymMatrix::from_diagonal(const Vector& diag) {
  Matrix m = Matrix::Zero(diag.size(), diag.size());
  m.diagonal() = diag;
  return SymMatrix(m);
}

Matrix SpectralDecomp::reconstruct() const {
  return basis * eigvals.asDiagonal() * basis.transpose();
}

SpectralDecomp sym_eig(const SymMatrix& m) {
  require_finite(m.mat(), "sym_eig");
  const Eigen::Index d = m.dim();
  SpectralDecomp out;

  if (is_exactly_diagonal(m.mat())) {
    // Diagonal fast path: exact eigenpairs, just sort the diagonal.
    std::vector<Eigen::Index> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return m(a, a) > m(b, b);
    });
    out.basis = Matrix::Zero(d, d);
    out.eigvals = Vector(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      out.eigvals(k) = m(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
      out.basis(order[static_cast<size_t>(k)], k) = 1.0;
    }
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigendecomposition failed to converge");
  }
  // Eigen returns ascending order; flip to descending.
  out.eigvals = solver.eigenvalues().reverse();
  out.basis = solver.eigenvectors().rowwise().reverse();
  apply_sign_convention(out.basis);
  return out;
}

SymMatrix psd_sqrt(const SymMatrix& m) {
  const SpectralDecomp dec = sym_eig(m);
  const double lam_max = std::max(dec.eigvals(0), 0.0);
  const double floor = -1e-10 * lam_max;
  Vector roots(dec.eigvals.size());
  for (Eigen::Index i = 0; i < dec.eigvals.size(); ++i) {
    const double lam = dec.eigvals(i);
    if (lam < floor) {
      throw std::invalid_argument("psd_sqrt: matrix is not PSD (eigenvalue " +
                                  std::to_string(lam) + " below tolerance)");
    }
    roots(i) = std::sqrt(std::max(lam, 0.0));
  }
  return SymMatrix(dec.basis * roots.asDiagonal() * dec.basis.transpose());
}

namespace {

Matrix pinv_apply(const SymMatrix& m, const Matrix& rhs) {
  if (m.dim() != rhs.rows()) {
    throw std::invalid_argument("spd_solve: dimension mismatch");
  }
  require_finite(rhs, "spd_solve");
  const SpectralDecomp dec = sym_eig(m);
  const double cutoff =
      1e-12 * static_cast<double>(m.dim()) * std::max(std::abs(dec.eigvals(0)), std::abs(dec.eigvals(dec.eigvals.size() - 1)));
  Matrix proj = dec.basis.transpose() * rhs;
  for (Eigen::Index i = 0; i < dec.eigvals.size(); ++i) {
    const double lam = dec.eigvals(i);
    proj.row(i) *= (lam > cutoff) ? 1.0 / lam : 0.0;
  }
  return dec.basis * proj;
}

}  // namespace

Matrix spd_solve(const SymMatrix& m, const Matrix& rhs) { return pinv_apply(m, rhs); }

Vector spd_solve(const SymMatrix& m, const Vector& rhs) {
  return Vector(pinv_apply(m, Matrix(rhs)));
}

SymMatrix pseudo_inverse(const SymMatrix& m) {
  return SymMatrix(pinv_apply(m, Matrix::Identity(m.dim(), m.dim())));
}

}  // namespace mmshift
