#pragma once

#include "mmshift/mmsolve.hpp"
#include "mmshift/numerics.hpp"

namespace mmshift {

/// Fitted two-block estimator beta_hat = A1 * beta_bar_S + A2 * beta_bar_T,
/// where beta_bar_S/T are the per-domain unbiased statistics.
struct ModelShiftEstimator {
  Matrix a1;
  Matrix a2;
  double radius_r = 0.0;
  double radius_gamma = 0.0;
  SolveReport report;
  Vector beta_bar_s;
  Vector beta_bar_t;
};

/// Builds the per-domain statistics and solves the two-block program. The
/// operator-norm constraints use the caller-supplied sigma_t (population if
/// known, the unlabeled estimate otherwise).
ModelShiftEstimator fit_model_shift(const Matrix& x_s, const Vector& y_s, const Matrix& x_t,
                                    const Vector& y_t, const SymMatrix& sigma_t,
                                    double noise_std, double radius_r, double radius_gamma);

Vector predict(const ModelShiftEstimator& est, const Vector& beta_bar_s,
               const Vector& beta_bar_t);

}  // namespace mmshift
