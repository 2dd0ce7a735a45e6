#include "mmshift/covshift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mmshift {

void ShiftProblem::validate() const {
  if (sigma_s_hat.dim() != sigma_t.dim()) {
    throw std::invalid_argument("ShiftProblem: matrix dims differ");
  }
  if (n_source < 1) throw std::invalid_argument("ShiftProblem: n_source must be >= 1");
  if (!(noise_std > 0.0)) throw std::invalid_argument("ShiftProblem: noise_std must be > 0");
  if (radius < 0.0) throw std::invalid_argument("ShiftProblem: radius must be >= 0");
}

double ShiftProblem::noise_var_over_n() const {
  return noise_std * noise_std / static_cast<double>(n_source);
}

LinearCoefficient::LinearCoefficient(const Matrix& m) : c(m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("LinearCoefficient: not square");
  if (!m.allFinite()) throw std::invalid_argument("LinearCoefficient: non-finite entries");
}

SufficientStatistic sufficient_statistic(const Matrix& x_source, const Vector& y_source,
                                         double noise_std) {
  if (x_source.rows() < 1) throw std::invalid_argument("sufficient_statistic: empty input");
  if (x_source.rows() != y_source.size()) {
    throw std::invalid_argument("sufficient_statistic: row count mismatch");
  }
  const double n = static_cast<double>(x_source.rows());
  const SymMatrix sigma_s_hat(Matrix(x_source.transpose() * x_source / n));
  const SymMatrix inv = pseudo_inverse(sigma_s_hat);
  SufficientStatistic out;
  out.beta_ss = inv.mat() * (x_source.transpose() * y_source) / n;
  out.covariance = SymMatrix(Matrix(noise_std * noise_std / n * inv.mat()));
  return out;
}

SufficientStatistic joint_sufficient_statistic(const Matrix& x_s, const Vector& y_s,
                                               const Matrix& x_t, const Vector& y_t,
                                               double noise_std) {
  if (x_s.rows() < 1) throw std::invalid_argument("joint_sufficient_statistic: empty source");
  if (x_s.rows() != y_s.size() || x_t.rows() != y_t.size()) {
    throw std::invalid_argument("joint_sufficient_statistic: row count mismatch");
  }
  if (x_t.rows() > 0 && x_t.cols() != x_s.cols()) {
    throw std::invalid_argument("joint_sufficient_statistic: dimension mismatch");
  }
  // n_S Sigma_S + n_T Sigma_T = X_S^T X_S + X_T^T X_T.
  Matrix gram = x_s.transpose() * x_s;
  Vector moment = x_s.transpose() * y_s;
  if (x_t.rows() > 0) {
    gram += x_t.transpose() * x_t;
    moment += x_t.transpose() * y_t;
  }
  const SymMatrix pooled(gram);
  const SymMatrix inv = pseudo_inverse(pooled);
  SufficientStatistic out;
  out.beta_ss = inv.mat() * moment;
  out.covariance = SymMatrix(Matrix(noise_std * noise_std * inv.mat()));
  return out;
}

WaterFillResult waterfill_lambda(const Vector& s, const Vector& t, double noise_var_over_n,
                                 double radius) {
  const Eigen::Index d = s.size();
  if (t.size() != d) throw std::invalid_argument("waterfill_lambda: spectra length mismatch");
  if (radius < 0.0) throw std::invalid_argument("waterfill_lambda: negative radius");
  if (!(noise_var_over_n > 0.0)) {
    throw std::invalid_argument("waterfill_lambda: noise variance must be > 0");
  }
  double sqrt_t_max = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (t(i) < 0.0) throw std::invalid_argument("waterfill_lambda: negative target eigenvalue");
    if (t(i) > 0.0 && !(s(i) > 0.0)) {
      throw std::invalid_argument("waterfill_lambda: s_i must be > 0 where t_i > 0");
    }
    sqrt_t_max = std::max(sqrt_t_max, std::sqrt(t(i)));
  }

  WaterFillResult out;
  out.shrinkages = Vector::Zero(d);
  if (sqrt_t_max == 0.0) {
    out.degenerate = true;  // zero estimator; lambda undefined
    return out;
  }

  const double r2 = radius * radius;
  const auto constraint = [&](double lambda) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (t(i) <= 0.0) continue;
      const double v = std::sqrt(t(i)) / lambda - 1.0;
      if (v > 0.0) acc += v / s(i);
    }
    return noise_var_over_n * acc;
  };

  double lambda = sqrt_t_max;
  if (r2 > 0.0) {
    double hi = sqrt_t_max;        // constraint(hi) = 0 <= r2
    double lo = sqrt_t_max * 0.5;  // expand until constraint(lo) >= r2
    while (constraint(lo) < r2 && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && (hi - lo) > 1e-18 * sqrt_t_max; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (constraint(mid) >= r2) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lambda = 0.5 * (lo + hi);
  }

  out.lambda = lambda;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (t(i) <= 0.0) continue;
    out.shrinkages(i) = std::max(0.0, 1.0 - lambda / std::sqrt(t(i)));
  }
  out.residual = constraint(lambda) - r2;
  return out;
}

namespace {

double frob(const Matrix& m) { return m.norm(); }

}  // namespace

JointDecomp joint_eig(const SymMatrix& a, const SymMatrix& b) {
  const Eigen::Index d = a.dim();
  if (b.dim() != d) throw std::invalid_argument("joint_eig: dims differ");
  const Matrix commutator = a.mat() * b.mat() - b.mat() * a.mat();
  const double scale = frob(a.mat()) * frob(b.mat());
  if (frob(commutator) > 1e-8 * std::max(scale, 1e-300)) {
    throw std::invalid_argument(
        "joint_eig: matrices do not commute; use mmsolve::solve_minimax_program for the "
        "non-commutative case");
  }

  const SpectralDecomp da = sym_eig(a);
  Matrix basis = da.basis;
  Vector ea = da.eigvals;
  Vector eb(d);

  // Within each eigenvalue cluster of a, rediagonalize b's projected block.
  const double tol = 1e-8 * std::max(std::abs(ea(0)), std::abs(ea(d - 1))) + 1e-300;
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && std::abs(ea(end) - ea(start)) <= tol) ++end;
    const Eigen::Index width = end - start;
    if (width == 1) {
      eb(start) = basis.col(start).dot(b.mat() * basis.col(start));
    } else {
      const Matrix sub = basis.middleCols(start, width);
      const SymMatrix block(Matrix(sub.transpose() * b.mat() * sub));
      const SpectralDecomp db = sym_eig(block);
      basis.middleCols(start, width) = sub * db.basis;
      eb.segment(start, width) = db.eigvals;
    }
    start = end;
  }

  // Re-apply the deterministic sign convention after the block rotations.
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    double best = std::abs(basis(0, j));
    for (Eigen::Index i = 1; i < d; ++i) {
      if (std::abs(basis(i, j)) > best) {
        best = std::abs(basis(i, j));
        arg = i;
      }
    }
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }

  JointDecomp out;
  out.basis = basis;
  out.eigvals_a = ea;
  out.eigvals_b = eb;
  return out;
}

CommutativeSolution minimax_commutative(const ShiftProblem& p) {
  p.validate();
  const JointDecomp joint = joint_eig(p.sigma_t, p.sigma_s_hat);
  const Vector& t = joint.eigvals_a;
  const Vector& s = joint.eigvals_b;

  CommutativeSolution out;
  out.waterfill = waterfill_lambda(s, t, p.noise_var_over_n(), p.radius);
  // In the shared basis the estimator is diagonal: the sigma_t^{+-1/2}
  // conjugations cancel per eigendirection.
  out.coefficient =
      LinearCoefficient(joint.basis * out.waterfill.shrinkages.asDiagonal() * joint.basis.transpose());
  double risk = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t(i) <= 0.0) continue;
    risk += p.noise_var_over_n() * t(i) / s(i) * out.waterfill.shrinkages(i);
  }
  out.risk = risk;
  return out;
}

LinearCoefficient ridge_source(const SymMatrix& sigma_s_hat, double lam) {
  if (lam < 0.0) throw std::invalid_argument("ridge_source: negative regularization");
  const SpectralDecomp dec = sym_eig(sigma_s_hat);
  const Eigen::Index d = sigma_s_hat.dim();
  Vector scale(d);
  const double cutoff = 1e-12 * static_cast<double>(d) * std::max(dec.eigvals(0), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double e = dec.eigvals(i);
    if (lam == 0.0) {
      scale(i) = (e > cutoff) ? 1.0 : 0.0;  // projection onto the range
    } else {
      scale(i) = e / (e + lam);
    }
  }
  return LinearCoefficient(dec.basis * scale.asDiagonal() * dec.basis.transpose());
}

LinearCoefficient ridge_target(const SymMatrix& sigma_t, double lam) {
  return ridge_source(sigma_t, lam);
}

}  // namespace mmshift
