#pragma once

#include "mmshift/mmsolve.hpp"
#include "mmshift/numerics.hpp"

namespace mmshift {

/// Nonnegative per-sample weights; normalize() rescales to mean one.
struct WeightVector {
  Vector weights;

  WeightVector() = default;
  explicit WeightVector(const Vector& w);
  WeightVector normalized() const;
};

/// beta = (X^T diag(w) X)^+ (X^T diag(w) y). Invariant to positive
/// rescaling of the whole weight vector.
Vector weighted_least_squares(const Matrix& x_s, const Vector& y_s, const WeightVector& w);

struct AsymptoticCovariance {
  SymMatrix m_hat;
};

/// Plug-in estimate of the asymptotic covariance of the reweighted
/// least-squares estimator:
///   M_hat = (1/n) sum_i w_i^2 (y_i - x_i.beta)^2 sigma_t^+ x_i x_i^T sigma_t^+,
/// symmetrized. Note the density ratio enters squared.
AsymptoticCovariance estimate_m_hat(const Matrix& x_s, const Vector& y_s, const WeightVector& w,
                                    const Vector& beta_ls, const SymMatrix& sigma_t);

/// Minimax correction on top of the reweighted estimator: the spectral
/// program with noise kernel M_hat/n_S and loss geometry sigma_t. The
/// final estimator is coefficient * beta_ls.
SolveReport minimax_with_approx_error(const SymMatrix& m_hat, const SymMatrix& sigma_t,
                                      long n_s, double radius);
SolveReport minimax_with_approx_error(const SymMatrix& m_hat, const SymMatrix& sigma_t,
                                      long n_s, double radius, const Matrix& warm_start);

enum class FeatureKind { kLinear, kQuadratic, kRadialBasis };

/// Feature map for the density-ratio regression. All maps include a bias
/// feature so class swap maps the fitted score to one minus itself.
struct FeatureMap {
  FeatureKind kind = FeatureKind::kLinear;
  Matrix centers;          // radial basis only: one center per row
  double bandwidth = 1.0;  // radial basis only
  int n_centers = 64;      // used when centers are picked at fit time

  static FeatureMap linear() { return {}; }
  static FeatureMap quadratic();
  static FeatureMap radial_basis(int n_centers);
};

/// Probabilistic-classification density-ratio model: least-squares fit of
/// alpha(x) = p_T / (p_S + p_T) from stacked 0/1 labels, with per-class
/// weights n/(2 n_class) so both classes contribute equally. Scores are
/// clipped to [1e-6, 1 - 1e-6] before the ratio transform f -> 1/(1/f - 1).
struct DensityRatioModel {
  FeatureMap feature_map;
  Vector coefficients;
  Vector bucket_edges;  // 11 score quantiles of the source sample at fit time
  double exponent = 1.0;
};

DensityRatioModel fit_density_ratio(const Matrix& x_source, const Matrix& x_target_unlabeled,
                                    const FeatureMap& feature_map);

/// Clipped score alpha(x) for each row of x.
Vector predict_alpha(const DensityRatioModel& model, const Matrix& x);

/// Density-ratio values alpha/(1-alpha) for each row of x.
Vector predict_ratio(const DensityRatioModel& model, const Matrix& x);

/// Rank-based decile weights: scores sorted (ties by input order), equal
/// count levels 1..10 (ceil(n/2) buckets when n < 10), raised to the power
/// exponent_c in [0,1], normalized to mean one.
WeightVector relative_weights(const DensityRatioModel& model, const Matrix& x,
                              double exponent_c);

/// Exact Gaussian density ratio p_T(x)/p_S(x) for centered normals,
/// evaluated in log space.
double gaussian_true_ratio(const SymMatrix& sigma_s, const SymMatrix& sigma_t, const Vector& x);

}  // namespace mmshift
