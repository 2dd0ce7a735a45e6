#pragma once

#include <Eigen/Core>

namespace mmshift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetrized on construction so that
/// entries(i,j) == entries(j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix from_diagonal(const Vector& diag);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& mat() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/// Eigendecomposition of a SymMatrix: basis columns are eigenvectors,
/// eigvals sorted descending. Sign convention: in each eigenvector the
/// entry of largest absolute value is positive (ties broken by lowest
/// index), so decompositions are reproducible across runs.
struct SpectralDecomp {
  Matrix basis;
  Vector eigvals;

  Matrix reconstruct() const;
};

SpectralDecomp sym_eig(const SymMatrix& m);

/// Symmetric PSD square root. Eigenvalues in [-1e-10*lambda_max, 0) are
/// clamped to zero; anything below that threshold is an error.
SymMatrix psd_sqrt(const SymMatrix& m);

/// Pseudo-inverse solve m^+ * rhs. Eigenvalues below 1e-12 * d * lambda_max
/// are treated as zero.
Matrix spd_solve(const SymMatrix& m, const Matrix& rhs);
Vector spd_solve(const SymMatrix& m, const Vector& rhs);

/// m^+ as a SymMatrix, same eigenvalue cutoff as spd_solve.
SymMatrix pseudo_inverse(const SymMatrix& m);

}  // namespace mmshift
