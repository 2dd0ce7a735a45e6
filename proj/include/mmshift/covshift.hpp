#pragma once

#include "mmshift/numerics.hpp"

namespace mmshift {

/// One covariate-shift estimation instance. sigma_t holds the target
/// second-moment matrix (population when known, the unlabeled-sample
/// estimate otherwise); the candidate set is the ball of the given radius.
struct ShiftProblem {
  SymMatrix sigma_s_hat;
  SymMatrix sigma_t;
  long n_source = 0;
  double noise_std = 1.0;
  double radius = 0.0;

  Eigen::Index dim() const { return sigma_s_hat.dim(); }
  void validate() const;
  /// Covariance scale of the sufficient statistic, sigma^2/n_S.
  double noise_var_over_n() const;
};

/// Unbiased estimate of the regression parameter together with its exact
/// Gaussian covariance.
struct SufficientStatistic {
  Vector beta_ss;
  SymMatrix covariance;
};

/// A d x d matrix applied to the sufficient statistic; the universal
/// representation of the estimators in this library.
struct LinearCoefficient {
  Matrix c;

  LinearCoefficient() = default;
  explicit LinearCoefficient(const Matrix& m);
};

/// Output of the water-filling equation of the commutative closed form.
/// degenerate flags an all-zero target spectrum, where the regularization
/// level is undefined and the estimator is identically zero.
struct WaterFillResult {
  double lambda = 0.0;
  Vector shrinkages;
  double residual = 0.0;
  bool degenerate = false;
};

SufficientStatistic sufficient_statistic(const Matrix& x_source, const Vector& y_source,
                                         double noise_std);

SufficientStatistic joint_sufficient_statistic(const Matrix& x_s, const Vector& y_s,
                                               const Matrix& x_t, const Vector& y_t,
                                               double noise_std);

/// Solves (noise_var_over_n) * sum_i (1/s_i) (sqrt(t_i)/lambda - 1)_+ = r^2
/// for lambda by bisection on (0, max_i sqrt(t_i)]. The left side is
/// monotone decreasing in lambda, so the bracket is guaranteed. radius == 0
/// returns lambda = max_i sqrt(t_i) with all shrinkages zero.
WaterFillResult waterfill_lambda(const Vector& s, const Vector& t, double noise_var_over_n,
                                 double radius);

struct CommutativeSolution {
  LinearCoefficient coefficient;
  double risk = 0.0;
  WaterFillResult waterfill;
};

/// Closed-form minimax coefficient for simultaneously diagonalizable
/// sigma_s_hat and sigma_t. Rejects non-commuting inputs (commutator
/// Frobenius norm above 1e-8 times the product of norms) and points the
/// caller at solve_minimax_program.
CommutativeSolution minimax_commutative(const ShiftProblem& p);

/// C = (sigma_s_hat + lam I)^{-1} sigma_s_hat. lam == 0 degrades to the
/// projection onto the range (ordinary least squares on the row space).
LinearCoefficient ridge_source(const SymMatrix& sigma_s_hat, double lam);

/// C = (sigma_t + lam I)^{-1} sigma_t, the target-geometry ridge.
LinearCoefficient ridge_target(const SymMatrix& sigma_t, double lam);

/// Shared eigenbasis of two commuting symmetric matrices. Diagonalizes the
/// second argument within eigenvalue clusters of the first so repeated
/// eigenvalues are handled; throws if the commutator is too large.
struct JointDecomp {
  Matrix basis;
  Vector eigvals_a;
  Vector eigvals_b;
};
JointDecomp joint_eig(const SymMatrix& a, const SymMatrix& b);

}  // namespace mmshift
