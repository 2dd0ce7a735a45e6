#pragma once

#include "mmshift/covshift.hpp"
#include "mmshift/numerics.hpp"

namespace mmshift {

/// Exact worst-case risk split of a linear coefficient. The bias is
/// attained at radius * worst_direction.
struct RiskReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double total = 0.0;
  Vector worst_direction;
};

/// bias = radius^2 * lambda_max((C-I)^T sigma_t (C-I)),
/// variance = Tr(C * noise_kernel * C^T * sigma_t).
RiskReport worst_case_risk(const LinearCoefficient& c, const SymMatrix& noise_kernel,
                           const SymMatrix& sigma_t, double radius);

/// Gaussian-prior (beta ~ N(0, prior_radius^2 I)) average risk:
/// prior_radius^2 * Tr((C-I)^T sigma_t (C-I)) + Tr(C * noise_kernel * C^T * sigma_t).
double average_case_risk(const LinearCoefficient& c, const SymMatrix& noise_kernel,
                         const SymMatrix& sigma_t, double prior_radius);

/// The AM-GM upper bound r_{B,Delta}(A1, A2) on the model-shift worst-case
/// risk (tight within a factor of two).
double model_shift_relaxed_risk(const Matrix& a1, const Matrix& a2,
                                const SymMatrix& sigma_s_hat, const SymMatrix& sigma_t_hat,
                                const SymMatrix& sigma_t, long n_s, long n_t, double noise_std,
                                double r, double gamma);

/// Exact model-shift worst-case risk
///   max_{||b||=r, ||delta||=gamma} ||sigma_t^{1/2}((A1+A2-I)b + A1 delta)||^2
/// plus the two trace variance terms. Dense angular grid over the product
/// of spheres for d <= 4 (polished by ascent from the best grid point);
/// larger d falls back to 100-restart alternating maximization, and the
/// result is flagged as a lower bound.
struct TrueRiskResult {
  double value = 0.0;
  bool lower_bound_only = false;
  Vector beta_direction;
  Vector delta_direction;
};
TrueRiskResult model_shift_true_risk(const Matrix& a1, const Matrix& a2,
                                     const SymMatrix& sigma_s_hat, const SymMatrix& sigma_t_hat,
                                     const SymMatrix& sigma_t, long n_s, long n_t,
                                     double noise_std, double r, double gamma, int resolution);

/// The explicit diagonal instance separating the minimax estimator from
/// every source ridge: s_i = 1; t_i = 1 for i <= d0, d^{-1/2} otherwise,
/// d0 = round(sqrt(d)/(d^{1/4}-1)); sigma = 1, r^2 = sqrt(d)/n. Requires d
/// to be a fourth power >= 16. ridge_floor is the minimum worst-case risk
/// of ridge_source over a 400-point log grid of regularizations in
/// [1e-4, 1e4], refined by golden-section search around the grid minimum.
struct SeparationResult {
  ShiftProblem problem;
  double minimax_risk = 0.0;
  double ridge_floor = 0.0;
  double ratio = 0.0;
  long d0 = 0;
};
SeparationResult separation_instance(long d, long n);

}  // namespace mmshift
