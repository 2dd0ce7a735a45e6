#pragma once

#include "mmshift/covshift.hpp"
#include "mmshift/numerics.hpp"

namespace mmshift {

/// Spectral-norm-regularized program
///   min_C  radius^2 * ||weight^{1/2} (C - I)||_op^2 + Tr(C * noise_kernel * C^T * weight),
/// the epigraph-eliminated form shared by the covariate-shift programs.
/// weight is the loss geometry (population or estimated target second
/// moment); noise_kernel is the covariance of the statistic C acts on.
struct SpectralProgram {
  SymMatrix weight;
  SymMatrix noise_kernel;
  double radius = 0.0;

  void validate() const;
};

struct SolveReport {
  LinearCoefficient coefficient;
  double objective = 0.0;
  double bias_term = 0.0;      // radius^2 * operator-norm term at the solution
  double variance_term = 0.0;  // trace term at the solution
  int iterations = 0;
  bool converged = true;
};

/// Soft-max smoothing of the squared operator norm:
///   value = mu * log sum_i exp(lambda_i(B^T B) / mu),
/// with value in [||B||_op^2, ||B||_op^2 + mu*log d] and the exact gradient
/// of the smoothed function (2 * B * softmax(B^T B / mu)).
struct OpNormSmoothed {
  double value = 0.0;
  Matrix gradient;
};
OpNormSmoothed smoothed_opnorm(const Matrix& b, double mu);

/// First-order solve of the spectral program: gradient descent with
/// backtracking on the smoothed objective, smoothing continuation
/// mu in {1e-2, 1e-4, 1e-6} times the objective scale, warm-starting each
/// stage from the previous one. Initialized at the average-case (Gaussian
/// prior) optimum C = (I + Q/r^2)^{-1}. Reported objective/bias/variance
/// are the exact (unsmoothed) values at the final iterate.
SolveReport solve_minimax_program(const SpectralProgram& prog);
/// Same, but starts from the given coefficient (used to warm-start
/// hyperparameter sweeps).
SolveReport solve_minimax_program(const SpectralProgram& prog, const Matrix& warm_start);

/// Two-block model-shift program:
///   min_{A1,A2} 2 r^2 ||sigma_t^{1/2}(A1+A2-I)||_op^2
///             + 2 gamma^2 ||sigma_t^{1/2} A1||_op^2
///             + (sigma^2/n_S) Tr(A1 sigma_s_hat^+ A1^T)
///             + (sigma^2/n_T) Tr(A2 sigma_t_hat^+ A2^T).
/// The report's bias_term carries the two operator-norm terms and
/// variance_term the two traces; coefficient holds A1 + A2.
struct ModelShiftSolution {
  Matrix a1;
  Matrix a2;
  SolveReport report;
};
ModelShiftSolution solve_model_shift_program(const SymMatrix& sigma_s_hat,
                                             const SymMatrix& sigma_t_hat,
                                             const SymMatrix& sigma_t, long n_s, long n_t,
                                             double noise_std, double radius_r,
                                             double radius_gamma);

}  // namespace mmshift
