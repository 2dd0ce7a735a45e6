#include "mmshift/approx.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mmshift {

namespace {

constexpr double kAlphaClip = 1e-6;

Matrix feature_matrix(const FeatureMap& map, const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  switch (map.kind) {
    case FeatureKind::kLinear: {
      Matrix f(n, d + 1);
      f.col(0).setOnes();
      f.rightCols(d) = x;
      return f;
    }
    case FeatureKind::kQuadratic: {
      const Eigen::Index nq = d * (d + 1) / 2;
      Matrix f(n, 1 + d + nq);
      f.col(0).setOnes();
      f.middleCols(1, d) = x;
      Eigen::Index col = 1 + d;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
          f.col(col++) = x.col(i).cwiseProduct(x.col(j));
        }
      }
      return f;
    }
    case FeatureKind::kRadialBasis: {
      if (map.centers.rows() == 0) {
        throw std::invalid_argument("feature_matrix: radial basis map has no centers");
      }
      const Eigen::Index m = map.centers.rows();
      Matrix f(n, m + 1);
      f.col(0).setOnes();
      const double inv = 1.0 / (2.0 * map.bandwidth * map.bandwidth);
      for (Eigen::Index j = 0; j < m; ++j) {
        f.col(j + 1) =
            (-(x.rowwise() - map.centers.row(j)).rowwise().squaredNorm() * inv).array().exp();
      }
      return f;
    }
  }
  throw std::logic_error("feature_matrix: unknown feature kind");
}

}  // namespace

FeatureMap FeatureMap::quadratic() {
  FeatureMap m;
  m.kind = FeatureKind::kQuadratic;
  return m;
}

FeatureMap FeatureMap::radial_basis(int n_centers) {
  FeatureMap m;
  m.kind = FeatureKind::kRadialBasis;
  m.n_centers = n_centers;
  return m;
}

WeightVector::WeightVector(const Vector& w) : weights(w) {
  if (!w.allFinite()) throw std::invalid_argument("WeightVector: non-finite weight");
  if ((w.array() < 0.0).any()) throw std::invalid_argument("WeightVector: negative weight");
}

WeightVector WeightVector::normalized() const {
  const double mean = weights.mean();
  if (!(mean > 0.0)) throw std::invalid_argument("WeightVector: all-zero weights");
  WeightVector out;
  out.weights = weights / mean;
  return out;
}

Vector weighted_least_squares(const Matrix& x_s, const Vector& y_s, const WeightVector& w) {
  const Eigen::Index n = x_s.rows();
  if (n < 1) throw std::invalid_argument("weighted_least_squares: empty input");
  if (y_s.size() != n || w.weights.size() != n) {
    throw std::invalid_argument("weighted_least_squares: size mismatch");
  }
  if (!(w.weights.maxCoeff() > 0.0)) {
    throw std::invalid_argument("weighted_least_squares: all-zero weights");
  }
  const Matrix xw = x_s.array().colwise() * w.weights.array();
  const SymMatrix gram(Matrix(x_s.transpose() * xw));
  return spd_solve(gram, Vector(xw.transpose() * y_s));
}

AsymptoticCovariance estimate_m_hat(const Matrix& x_s, const Vector& y_s, const WeightVector& w,
                                    const Vector& beta_ls, const SymMatrix& sigma_t) {
  const Eigen::Index n = x_s.rows();
  const Eigen::Index d = x_s.cols();
  if (y_s.size() != n || w.weights.size() != n || beta_ls.size() != d || sigma_t.dim() != d) {
    throw std::invalid_argument("estimate_m_hat: size mismatch");
  }
  const SpectralDecomp dt = sym_eig(sigma_t);
  if (dt.eigvals.minCoeff() <= 1e-12 * static_cast<double>(d) * std::max(dt.eigvals(0), 0.0)) {
    std::cerr << "estimate_m_hat: sigma_t is singular, using pseudo-inverse\n";
  }
  const Matrix tinv = pseudo_inverse(sigma_t).mat();
  const Vector resid = y_s - x_s * beta_ls;
  // sum_i w_i^2 resid_i^2 x_i x_i^T, conjugated once at the end.
  const Vector coef = w.weights.array().square() * resid.array().square();
  const Matrix scaled = x_s.array().colwise() * coef.array();
  const Matrix core = x_s.transpose() * scaled / static_cast<double>(n);
  return AsymptoticCovariance{SymMatrix(Matrix(tinv * core * tinv))};
}

SolveReport minimax_with_approx_error(const SymMatrix& m_hat, const SymMatrix& sigma_t,
                                      long n_s, double radius) {
  if (n_s < 1) throw std::invalid_argument("minimax_with_approx_error: n_s must be >= 1");
  SpectralProgram prog;
  prog.weight = sigma_t;
  prog.noise_kernel = SymMatrix(Matrix(m_hat.mat() / static_cast<double>(n_s)));
  prog.radius = radius;
  return solve_minimax_program(prog);
}

SolveReport minimax_with_approx_error(const SymMatrix& m_hat, const SymMatrix& sigma_t,
                                      long n_s, double radius, const Matrix& warm_start) {
  if (n_s < 1) throw std::invalid_argument("minimax_with_approx_error: n_s must be >= 1");
  SpectralProgram prog;
  prog.weight = sigma_t;
  prog.noise_kernel = SymMatrix(Matrix(m_hat.mat() / static_cast<double>(n_s)));
  prog.radius = radius;
  return solve_minimax_program(prog, warm_start);
}

DensityRatioModel fit_density_ratio(const Matrix& x_source, const Matrix& x_target_unlabeled,
                                    const FeatureMap& feature_map) {
  const Eigen::Index ns = x_source.rows();
  const Eigen::Index nu = x_target_unlabeled.rows();
  if (ns < 1 || nu < 1) throw std::invalid_argument("fit_density_ratio: empty sample set");
  if (x_source.cols() != x_target_unlabeled.cols()) {
    throw std::invalid_argument("fit_density_ratio: dimension mismatch");
  }

  DensityRatioModel model;
  model.feature_map = feature_map;

  if (feature_map.kind == FeatureKind::kRadialBasis && feature_map.centers.rows() == 0) {
    // Deterministic centers: stride over the pooled sample; bandwidth from
    // the median pairwise distance of the chosen centers.
    const Eigen::Index m =
        std::min<Eigen::Index>(feature_map.n_centers, ns + nu);
    Matrix centers(m, x_source.cols());
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index idx = k * (ns + nu) / m;
      centers.row(k) = (idx < ns) ? x_source.row(idx) : x_target_unlabeled.row(idx - ns);
    }
    std::vector<double> dists;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        dists.push_back((centers.row(i) - centers.row(j)).norm());
      }
    }
    double bw = 1.0;
    if (!dists.empty()) {
      std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
      bw = std::max(dists[dists.size() / 2], 1e-12);
    }
    model.feature_map.centers = centers;
    model.feature_map.bandwidth = bw;
  }

  const Matrix fs = feature_matrix(model.feature_map, x_source);
  const Matrix fu = feature_matrix(model.feature_map, x_target_unlabeled);
  const double n_total = static_cast<double>(ns + nu);
  const double ws = n_total / (2.0 * static_cast<double>(ns));
  const double wu = n_total / (2.0 * static_cast<double>(nu));

  // Weighted normal equations for labels 0 (source) and 1 (unlabeled
  // target); only the target block contributes to the moment vector.
  const Matrix gram = ws * (fs.transpose() * fs) + wu * (fu.transpose() * fu);
  const Vector moment = wu * (fu.transpose() * Vector::Ones(nu));
  model.coefficients = spd_solve(SymMatrix(gram), moment);

  const Vector scores = predict_alpha(model, x_source);
  Vector sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  model.bucket_edges = Vector(11);
  for (int q = 0; q <= 10; ++q) {
    const Eigen::Index idx =
        std::min<Eigen::Index>(ns - 1, static_cast<Eigen::Index>(q * (ns - 1) / 10));
    model.bucket_edges(q) = sorted(idx);
  }
  return model;
}

Vector predict_alpha(const DensityRatioModel& model, const Matrix& x) {
  const Matrix f = feature_matrix(model.feature_map, x);
  if (f.cols() != model.coefficients.size()) {
    throw std::invalid_argument("predict_alpha: model/feature mismatch");
  }
  Vector alpha = f * model.coefficients;
  return alpha.cwiseMax(kAlphaClip).cwiseMin(1.0 - kAlphaClip);
}

Vector predict_ratio(const DensityRatioModel& model, const Matrix& x) {
  const Vector alpha = predict_alpha(model, x);
  return alpha.array() / (1.0 - alpha.array());
}

WeightVector relative_weights(const DensityRatioModel& model, const Matrix& x,
                              double exponent_c) {
  if (exponent_c < 0.0 || exponent_c > 1.0) {
    throw std::invalid_argument("relative_weights: exponent must lie in [0,1]");
  }
  const Eigen::Index n = x.rows();
  if (n < 1) throw std::invalid_argument("relative_weights: empty input");
  const Vector alpha = predict_alpha(model, x);

  const Eigen::Index levels = (n >= 10) ? 10 : std::max<Eigen::Index>((n + 1) / 2, 1);
  if (n < 10) {
    std::cerr << "relative_weights: only " << n << " samples, using " << levels
              << " buckets instead of 10\n";
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return alpha(a) < alpha(b); });

  Vector w(n);
  for (Eigen::Index rank = 0; rank < n; ++rank) {
    const Eigen::Index level = rank * levels / n + 1;  // equal-count buckets
    w(order[static_cast<size_t>(rank)]) = std::pow(static_cast<double>(level), exponent_c);
  }
  return WeightVector(w).normalized();
}

double gaussian_true_ratio(const SymMatrix& sigma_s, const SymMatrix& sigma_t, const Vector& x) {
  const Eigen::Index d = sigma_s.dim();
  if (sigma_t.dim() != d || x.size() != d) {
    throw std::invalid_argument("gaussian_true_ratio: dimension mismatch");
  }
  const SpectralDecomp ds = sym_eig(sigma_s);
  const SpectralDecomp dt = sym_eig(sigma_t);
  if (ds.eigvals.minCoeff() <= 0.0 || dt.eigvals.minCoeff() <= 0.0) {
    throw std::invalid_argument("gaussian_true_ratio: covariance must be positive definite");
  }
  double log_ratio = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    log_ratio += 0.5 * (std::log(ds.eigvals(i)) - std::log(dt.eigvals(i)));
  }
  const Vector xs = ds.basis.transpose() * x;
  const Vector xt = dt.basis.transpose() * x;
  for (Eigen::Index i = 0; i < d; ++i) {
    log_ratio += 0.5 * (xs(i) * xs(i) / ds.eigvals(i) - xt(i) * xt(i) / dt.eigvals(i));
  }
  return std::exp(log_ratio);
}

}  // namespace mmshift
