#include "mmshift/synth.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace mmshift {

Matrix random_orthogonal(Eigen::Index dim, RngSeed seed) {
  Philox rng(seed);
  const Matrix g = rng.normal_matrix(dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

SymMatrix make_covariance(const CovSpec& spec, RngSeed seed) {
  if (spec.dim < 1) throw std::invalid_argument("make_covariance: dim must be >= 1");
  Vector lam(spec.dim);
  if (spec.law == SpectrumLaw::kPower) {
    for (Eigen::Index i = 0; i < spec.dim; ++i) {
      lam(i) = std::pow(static_cast<double>(i + 1), -spec.alpha);
    }
  } else {
    if (spec.explicit_spectrum.size() != spec.dim) {
      throw std::invalid_argument("make_covariance: explicit spectrum has wrong length");
    }
    lam = spec.explicit_spectrum;
    if ((lam.array() < 0.0).any()) {
      throw std::invalid_argument("make_covariance: spectrum must be nonnegative");
    }
  }
  const double sq = lam.squaredNorm();
  if (sq <= 0.0) throw std::invalid_argument("make_covariance: zero spectrum");
  // ||Sigma||_F^2 = sum lambda_i^2 = d.
  lam *= std::sqrt(static_cast<double>(spec.dim) / sq);

  if (spec.eigenspace == Eigenspace::kIdentity) {
    return SymMatrix::from_diagonal(lam);
  }
  const Matrix q = random_orthogonal(spec.dim, seed);
  return SymMatrix(q * lam.asDiagonal() * q.transpose());
}

Matrix sample_gaussian_design(Eigen::Index n, const SymMatrix& sigma, RngSeed seed) {
  Philox rng(seed);
  const SymMatrix root = psd_sqrt(sigma);
  const Matrix z = rng.normal_matrix(n, sigma.dim());
  return z * root.mat();  // rows ~ N(0, root * root) = N(0, sigma)
}

Vector random_beta(Eigen::Index d, double norm_r, RngSeed seed) {
  if (norm_r < 0.0) throw std::invalid_argument("random_beta: negative norm");
  Philox rng(seed);
  Vector v = rng.normal_vector(d);
  if (norm_r == 0.0) return Vector::Zero(d);
  const double n = v.norm();
  if (n == 0.0) throw std::runtime_error("random_beta: degenerate draw");
  return v * (norm_r / n);
}

Vector linear_labels(const Matrix& x, const Vector& beta, double noise_std, RngSeed seed) {
  if (x.cols() != beta.size()) throw std::invalid_argument("linear_labels: dim mismatch");
  Philox rng(seed);
  Vector y = x * beta;
  if (noise_std > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise_std * rng.normal();
  }
  return y;
}

Vector relu_labels(const Matrix& x, const Matrix& w, const Vector& a, double noise_std,
                   RngSeed seed) {
  if (x.cols() != w.cols() || w.rows() != a.size()) {
    throw std::invalid_argument("relu_labels: dim mismatch");
  }
  Philox rng(seed);
  const double scale = 1.0 / static_cast<double>(x.cols());
  Matrix hidden = x * w.transpose();  // n x m
  hidden = hidden.cwiseMax(0.0);
  Vector y = scale * (hidden * a);
  if (noise_std > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise_std * rng.normal();
  }
  return y;
}

Vector model_shift_delta(Eigen::Index d, double gamma, RngSeed seed) {
  return random_beta(d, gamma, seed);
}

ReluTruth make_relu_truth(Eigen::Index d, RngSeed seed) {
  Philox rng(seed);
  ReluTruth t;
  t.w = rng.normal_matrix(d, d);
  t.a = rng.normal_vector(d);
  return t;
}

Vector relu_best_linear(const ReluTruth& truth) {
  return truth.w.transpose() * truth.a / (2.0 * static_cast<double>(truth.w.cols()));
}

}  // namespace mmshift
