#include "mmshift/riskeval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mmshift/rng.hpp"

namespace mmshift {

RiskReport worst_case_risk(const LinearCoefficient& c, const SymMatrix& noise_kernel,
                           const SymMatrix& sigma_t, double radius) {
  const Eigen::Index d = sigma_t.dim();
  if (c.c.rows() != d || noise_kernel.dim() != d) {
    throw std::invalid_argument("worst_case_risk: dimension mismatch");
  }
  const Matrix diff = c.c - Matrix::Identity(d, d);
  const SymMatrix bias_form(Matrix(diff.transpose() * sigma_t.mat() * diff));
  const SpectralDecomp dec = sym_eig(bias_form);
  RiskReport out;
  out.bias_sq = radius * radius * std::max(dec.eigvals(0), 0.0);
  out.worst_direction = dec.basis.col(0);
  out.variance = (sigma_t.mat() * c.c).cwiseProduct(c.c * noise_kernel.mat()).sum();
  out.total = out.bias_sq + out.variance;
  return out;
}

double average_case_risk(const LinearCoefficient& c, const SymMatrix& noise_kernel,
                         const SymMatrix& sigma_t, double prior_radius) {
  const Eigen::Index d = sigma_t.dim();
  const Matrix diff = c.c - Matrix::Identity(d, d);
  const double bias = (sigma_t.mat() * diff).cwiseProduct(diff).sum();
  const double variance = (sigma_t.mat() * c.c).cwiseProduct(c.c * noise_kernel.mat()).sum();
  return prior_radius * prior_radius * bias + variance;
}

namespace {

double sq_opnorm(const Matrix& b, Vector* direction = nullptr) {
  const SymMatrix gram(Matrix(b.transpose() * b));
  const SpectralDecomp dec = sym_eig(gram);
  if (direction != nullptr) *direction = dec.basis.col(0);
  return std::max(dec.eigvals(0), 0.0);
}

struct ModelShiftTerms {
  Matrix m1;  // sigma_t^{1/2} (A1 + A2 - I)
  Matrix m2;  // sigma_t^{1/2} A1
  double variance = 0.0;
};

ModelShiftTerms model_shift_terms(const Matrix& a1, const Matrix& a2,
                                  const SymMatrix& sigma_s_hat, const SymMatrix& sigma_t_hat,
                                  const SymMatrix& sigma_t, long n_s, long n_t,
                                  double noise_std) {
  const Eigen::Index d = sigma_t.dim();
  if (a1.rows() != d || a2.rows() != d || sigma_s_hat.dim() != d || sigma_t_hat.dim() != d) {
    throw std::invalid_argument("model shift risk: dimension mismatch");
  }
  if (n_s < 1 || n_t < 1) throw std::invalid_argument("model shift risk: need n_s, n_t >= 1");
  const double sig2 = noise_std * noise_std;
  const Matrix root = psd_sqrt(sigma_t).mat();
  ModelShiftTerms out;
  out.m1 = root * (a1 + a2 - Matrix::Identity(d, d));
  out.m2 = root * a1;
  const Matrix qs = sig2 / static_cast<double>(n_s) * pseudo_inverse(sigma_s_hat).mat();
  const Matrix qt = sig2 / static_cast<double>(n_t) * pseudo_inverse(sigma_t_hat).mat();
  out.variance = (a1 * qs).cwiseProduct(a1).sum() + (a2 * qt).cwiseProduct(a2).sum();
  return out;
}

// Ascent for max ||m1 b + m2 del||^2 over the product of spheres; each
// block update moves to the sphere point maximizing the linearization
// (exact for this convex objective, monotone like power iteration).
double alternating_ascent(const Matrix& m1, const Matrix& m2, double r, double gamma,
                          Vector* beta, Vector* delta) {
  const Matrix g1 = m1.transpose() * m1;
  const Matrix g12 = m1.transpose() * m2;
  const Matrix g2 = m2.transpose() * m2;
  const auto value = [&](const Vector& b, const Vector& dl) {
    return b.dot(g1 * b) + 2.0 * b.dot(g12 * dl) + dl.dot(g2 * dl);
  };
  double best = value(*beta, *delta);
  for (int it = 0; it < 500; ++it) {
    Vector gb = g1 * *beta + g12 * *delta;
    if (gb.norm() > 0.0 && r > 0.0) *beta = r * gb.normalized();
    Vector gd = g12.transpose() * *beta + g2 * *delta;
    if (gd.norm() > 0.0 && gamma > 0.0) *delta = gamma * gd.normalized();
    const double now = value(*beta, *delta);
    if (now <= best * (1.0 + 1e-14)) {
      best = std::max(best, now);
      break;
    }
    best = now;
  }
  return best;
}

// Uniform-ish deterministic grid on the sphere of the given radius:
// d = 1 gives the two endpoints, d = 2 an angle grid, d = 3 and 4
// spherical-coordinate grids.
std::vector<Vector> sphere_grid(Eigen::Index d, double radius, int resolution) {
  std::vector<Vector> pts;
  if (radius == 0.0) {
    pts.push_back(Vector::Zero(d));
    return pts;
  }
  if (d == 1) {
    pts.push_back(Vector::Constant(1, radius));
    pts.push_back(Vector::Constant(1, -radius));
    return pts;
  }
  const double pi = M_PI;
  if (d == 2) {
    const int n = 4 * resolution;
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * pi * i / n;
      Vector v(2);
      v << std::cos(th), std::sin(th);
      pts.push_back(radius * v);
    }
    return pts;
  }
  if (d == 3) {
    const int np = resolution;      // polar
    const int na = 2 * resolution;  // azimuth
    for (int i = 0; i <= np; ++i) {
      const double phi = pi * i / np;
      const int slices = (i == 0 || i == np) ? 1 : na;
      for (int j = 0; j < slices; ++j) {
        const double th = 2.0 * pi * j / na;
        Vector v(3);
        v << std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi);
        pts.push_back(radius * v);
      }
    }
    return pts;
  }
  if (d == 4) {
    const int n1 = resolution, n2 = resolution, n3 = 2 * resolution;
    for (int i = 0; i <= n1; ++i) {
      const double p1 = pi * i / n1;
      for (int j = 0; j <= n2; ++j) {
        const double p2 = pi * j / n2;
        for (int k = 0; k < n3; ++k) {
          const double th = 2.0 * pi * k / n3;
          Vector v(4);
          v << std::cos(p1), std::sin(p1) * std::cos(p2), std::sin(p1) * std::sin(p2) * std::cos(th),
              std::sin(p1) * std::sin(p2) * std::sin(th);
          pts.push_back(radius * v);
        }
      }
    }
    return pts;
  }
  throw std::invalid_argument("sphere_grid: grid mode only supports d <= 4");
}

}  // namespace

double model_shift_relaxed_risk(const Matrix& a1, const Matrix& a2,
                                const SymMatrix& sigma_s_hat, const SymMatrix& sigma_t_hat,
                                const SymMatrix& sigma_t, long n_s, long n_t, double noise_std,
                                double r, double gamma) {
  const ModelShiftTerms t =
      model_shift_terms(a1, a2, sigma_s_hat, sigma_t_hat, sigma_t, n_s, n_t, noise_std);
  return 2.0 * r * r * sq_opnorm(t.m1) + 2.0 * gamma * gamma * sq_opnorm(t.m2) + t.variance;
}

TrueRiskResult model_shift_true_risk(const Matrix& a1, const Matrix& a2,
                                     const SymMatrix& sigma_s_hat, const SymMatrix& sigma_t_hat,
                                     const SymMatrix& sigma_t, long n_s, long n_t,
                                     double noise_std, double r, double gamma, int resolution) {
  if (resolution < 4) throw std::invalid_argument("model_shift_true_risk: resolution too coarse");
  const Eigen::Index d = sigma_t.dim();
  const ModelShiftTerms t =
      model_shift_terms(a1, a2, sigma_s_hat, sigma_t_hat, sigma_t, n_s, n_t, noise_std);

  TrueRiskResult out;
  Vector best_beta = Vector::Zero(d);
  Vector best_delta = Vector::Zero(d);
  double best = -1.0;

  if (d <= 4) {
    // The bilinear cross term makes precomputed images cheap to combine:
    // ||u + v||^2 = ||u||^2 + ||v||^2 + 2 u.v.
    const auto bgrid = sphere_grid(d, r, resolution);
    const auto dgrid = sphere_grid(d, gamma, resolution);
    std::vector<Vector> bimg(bgrid.size()), dimg(dgrid.size());
    std::vector<double> bsq(bgrid.size()), dsq(dgrid.size());
    for (size_t i = 0; i < bgrid.size(); ++i) {
      bimg[i] = t.m1 * bgrid[i];
      bsq[i] = bimg[i].squaredNorm();
    }
    for (size_t j = 0; j < dgrid.size(); ++j) {
      dimg[j] = t.m2 * dgrid[j];
      dsq[j] = dimg[j].squaredNorm();
    }
    for (size_t i = 0; i < bgrid.size(); ++i) {
      for (size_t j = 0; j < dgrid.size(); ++j) {
        const double v = bsq[i] + dsq[j] + 2.0 * bimg[i].dot(dimg[j]);
        if (v > best) {
          best = v;
          best_beta = bgrid[i];
          best_delta = dgrid[j];
        }
      }
    }
    // Polish the grid winner so coarse grids cannot undercut the max.
    best = alternating_ascent(t.m1, t.m2, r, gamma, &best_beta, &best_delta);
    out.lower_bound_only = false;
  } else {
    Philox rng(0x6d735f747275ULL, 0);  // fixed stream: restarts are part of the algorithm
    for (int restart = 0; restart < 100; ++restart) {
      Vector b = rng.normal_vector(d);
      Vector dl = rng.normal_vector(d);
      b = (r > 0.0 && b.norm() > 0.0) ? Vector(r * b.normalized()) : Vector(Vector::Zero(d));
      dl = (gamma > 0.0 && dl.norm() > 0.0) ? Vector(gamma * dl.normalized())
                                            : Vector(Vector::Zero(d));
      const double v = alternating_ascent(t.m1, t.m2, r, gamma, &b, &dl);
      if (v > best) {
        best = v;
        best_beta = b;
        best_delta = dl;
      }
    }
    out.lower_bound_only = true;
  }

  out.value = std::max(best, 0.0) + t.variance;
  out.beta_direction = best_beta;
  out.delta_direction = best_delta;
  return out;
}

namespace {

// Worst-case ridge risk on the diagonal separation instance, evaluated in
// the shared eigenbasis: bias = r^2 max_i t_i lam^2/(s_i+lam)^2, variance =
// (1/n) sum_i t_i s_i/(s_i+lam)^2. Identical to
// worst_case_risk(ridge_source(lam)) because everything is diagonal.
double diag_ridge_risk(const Vector& s, const Vector& t, double noise_var_over_n, double r2,
                       double lam) {
  double bias = 0.0;
  double var = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double shrink = s(i) / (s(i) + lam);
    bias = std::max(bias, t(i) * (1.0 - shrink) * (1.0 - shrink));
    var += noise_var_over_n * t(i) * s(i) / ((s(i) + lam) * (s(i) + lam));
  }
  return r2 * bias + var;
}

}  // namespace

SeparationResult separation_instance(long d, long n) {
  if (d < 16) throw std::invalid_argument("separation_instance: need d >= 16");
  if (n < 1) throw std::invalid_argument("separation_instance: need n >= 1");
  const double root4 = std::round(std::pow(static_cast<double>(d), 0.25));
  if (static_cast<long>(root4 * root4 * root4 * root4) != d) {
    throw std::invalid_argument("separation_instance: d must be a fourth power");
  }
  const double sqrt_d = root4 * root4;
  const long d0 = std::lround(sqrt_d / (root4 - 1.0));

  Vector s = Vector::Ones(d);
  Vector t(d);
  for (long i = 0; i < d; ++i) t(i) = (i < d0) ? 1.0 : 1.0 / sqrt_d;

  SeparationResult out;
  out.d0 = d0;
  const double r2 = sqrt_d / static_cast<double>(n);
  const double nvn = 1.0 / static_cast<double>(n);  // sigma = 1

  out.problem.sigma_s_hat = SymMatrix::from_diagonal(s);
  out.problem.sigma_t = SymMatrix::from_diagonal(t);
  out.problem.n_source = n;
  out.problem.noise_std = 1.0;
  out.problem.radius = std::sqrt(r2);

  const WaterFillResult wf = waterfill_lambda(s, t, nvn, out.problem.radius);
  double risk = 0.0;
  for (long i = 0; i < d; ++i) risk += nvn * t(i) / s(i) * wf.shrinkages(i);
  out.minimax_risk = risk;

  // 400-point log grid, then golden-section refinement around the best
  // bracket. The risk is unimodal in lambda here; the appendix bound
  // sqrt(d)/(2n) holds for every lambda regardless.
  const int grid_n = 400;
  double best_risk = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  const auto lam_at = [&](int i) {
    return std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / (grid_n - 1));
  };
  for (int i = 0; i < grid_n; ++i) {
    const double v = diag_ridge_risk(s, t, nvn, r2, lam_at(i));
    if (v < best_risk) {
      best_risk = v;
      best_idx = i;
    }
  }
  double lo = std::log(lam_at(std::max(best_idx - 1, 0)));
  double hi = std::log(lam_at(std::min(best_idx + 1, grid_n - 1)));
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = diag_ridge_risk(s, t, nvn, r2, std::exp(x1));
  double f2 = diag_ridge_risk(s, t, nvn, r2, std::exp(x2));
  for (int it = 0; it < 200 && (hi - lo) > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = diag_ridge_risk(s, t, nvn, r2, std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = diag_ridge_risk(s, t, nvn, r2, std::exp(x2));
    }
  }
  out.ridge_floor = std::min(best_risk, std::min(f1, f2));
  out.ratio = out.ridge_floor / out.minimax_risk;
  return out;
}

}  // namespace mmshift
