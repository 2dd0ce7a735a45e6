#pragma once

#include <cstdint>

#include "mmshift/numerics.hpp"
#include "mmshift/rng.hpp"

namespace mmshift {

enum class SpectrumLaw { kPower, kExplicit };
enum class Eigenspace { kIdentity, kRandomOrthogonal };

/// Covariance recipe: eigenvalues follow the law (power: lambda_i ~ 1/i^alpha)
/// and are rescaled so the squared Frobenius norm equals the dimension.
struct CovSpec {
  Eigen::Index dim = 0;
  SpectrumLaw law = SpectrumLaw::kPower;
  double alpha = 0.0;       // power law exponent; negative gives increasing spectra
  Vector explicit_spectrum; // used when law == kExplicit
  Eigenspace eigenspace = Eigenspace::kIdentity;
};

SymMatrix make_covariance(const CovSpec& spec, RngSeed seed);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with positive
/// R diagonal).
Matrix random_orthogonal(Eigen::Index dim, RngSeed seed);

/// n i.i.d. rows from N(0, sigma).
Matrix sample_gaussian_design(Eigen::Index n, const SymMatrix& sigma, RngSeed seed);

/// Standard normal direction rescaled to exact norm r.
Vector random_beta(Eigen::Index d, double norm_r, RngSeed seed);

/// y = X beta + N(0, sigma^2 I).
Vector linear_labels(const Matrix& x, const Vector& beta, double noise_std, RngSeed seed);

/// One-hidden-layer ReLU labels: y = (1/d) a^T (W x)_+ + noise.
Vector relu_labels(const Matrix& x, const Matrix& w, const Vector& a, double noise_std,
                   RngSeed seed);

/// Random direction with exact norm gamma.
Vector model_shift_delta(Eigen::Index d, double gamma, RngSeed seed);

/// ReLU ground-truth parameters, standard normal entries. Hidden width m = d.
struct ReluTruth {
  Matrix w;  // m x d
  Vector a;  // m
};
ReluTruth make_relu_truth(Eigen::Index d, RngSeed seed);

/// Best linear predictor of the ReLU network under any centered Gaussian
/// input: beta = W^T a / (2d), from Stein's identity (E[1(w_j.x > 0)] = 1/2).
Vector relu_best_linear(const ReluTruth& truth);

}  // namespace mmshift
