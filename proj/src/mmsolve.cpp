#include "mmshift/mmsolve.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmshift {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kStageRelTol = 1e-9;
constexpr int kPlateauIters = 10;
constexpr int kMaxIterations = 5000;
constexpr double kContinuation[3] = {1e-2, 1e-4, 1e-6};

struct SoftMaxEig {
  double value = 0.0;  // mu * logsumexp(eigvals / mu)
  Matrix p;            // softmax matrix, symmetric PSD with unit trace
};

// Softmax over the eigenvalues of the PSD matrix g, computed with the
// usual max shift.
SoftMaxEig softmax_psd(const Matrix& g, double mu) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("smoothed opnorm: eigendecomposition failed");
  }
  const Vector& lam = es.eigenvalues();
  const double lmax = lam.maxCoeff();
  Vector w = ((lam.array() - lmax) / mu).exp();
  const double total = w.sum();
  SoftMaxEig out;
  out.value = lmax + mu * std::log(total);
  w /= total;
  out.p = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

double exact_sq_opnorm(const Matrix& b) {
  if (b.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(b.transpose() * b), Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

void require_psd(const SymMatrix& m, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(lmax, 1.0)) {
    throw std::invalid_argument(std::string(who) + ": matrix is not PSD");
  }
}

// Monotone backtracking gradient descent on a smooth objective. The
// callable returns the objective and fills the gradient when asked.
// Objective values never increase across accepted steps; a line search
// that cannot make progress ends the stage at the current iterate.
template <typename F>
int backtracking_gd(F&& eval, Matrix* state, double init_step, int budget, bool* plateaued) {
  Matrix grad(state->rows(), state->cols());
  double obj = eval(*state, &grad);
  double step = init_step;
  int plateau = 0;
  int used = 0;
  *plateaued = false;
  for (; used < budget; ++used) {
    const double gnorm2 = grad.squaredNorm();
    if (gnorm2 == 0.0) {
      *plateaued = true;
      break;
    }
    step *= 1.3;  // optimistic growth, backtracking corrects
    Matrix trial;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = *state - step * grad;
      const double trial_obj = eval(trial, nullptr);
      if (trial_obj <= obj - kArmijo * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      *plateaued = true;  // no descent possible at this smoothing level
      break;
    }
    *state = trial;
    const double new_obj = eval(*state, &grad);
    const double rel = (obj - new_obj) / std::max(std::abs(obj), 1e-300);
    obj = new_obj;
    plateau = (rel < kStageRelTol) ? plateau + 1 : 0;
    if (plateau >= kPlateauIters) {
      *plateaued = true;
      ++used;
      break;
    }
  }
  return used;
}

}  // namespace

void SpectralProgram::validate() const {
  if (weight.dim() != noise_kernel.dim()) {
    throw std::invalid_argument("SpectralProgram: dims differ");
  }
  if (radius < 0.0) throw std::invalid_argument("SpectralProgram: negative radius");
  require_psd(weight, "SpectralProgram weight");
  require_psd(noise_kernel, "SpectralProgram noise_kernel");
}

OpNormSmoothed smoothed_opnorm(const Matrix& b, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("smoothed_opnorm: mu must be > 0");
  const SoftMaxEig sm = softmax_psd(Matrix(b.transpose() * b), mu);
  OpNormSmoothed out;
  out.value = sm.value;
  out.gradient = 2.0 * b * sm.p;
  return out;
}

SolveReport solve_minimax_program(const SpectralProgram& prog) {
  prog.validate();
  const Eigen::Index d = prog.weight.dim();
  Matrix init;
  if (prog.radius > 0.0) {
    // Average-case optimum under the Gaussian prior N(0, r^2 I):
    // C = (I + Q/r^2)^{-1}; reduces to source ridge when Q is the
    // sufficient-statistic covariance.
    const SpectralDecomp dq = sym_eig(prog.noise_kernel);
    Vector scale(d);
    const double r2 = prog.radius * prog.radius;
    for (Eigen::Index i = 0; i < d; ++i) {
      scale(i) = r2 / (r2 + std::max(dq.eigvals(i), 0.0));
    }
    init = dq.basis * scale.asDiagonal() * dq.basis.transpose();
  } else {
    init = Matrix::Zero(d, d);
  }
  return solve_minimax_program(prog, init);
}

SolveReport solve_minimax_program(const SpectralProgram& prog, const Matrix& warm_start) {
  prog.validate();
  const Eigen::Index d = prog.weight.dim();
  if (warm_start.rows() != d || warm_start.cols() != d) {
    throw std::invalid_argument("solve_minimax_program: warm start has wrong shape");
  }
  const Matrix& w = prog.weight.mat();
  const Matrix& q = prog.noise_kernel.mat();
  const double r = prog.radius;
  const double r2 = r * r;

  SolveReport report;
  const auto finalize = [&](const Matrix& c) {
    const Matrix root = psd_sqrt(prog.weight).mat();
    report.coefficient = LinearCoefficient(c);
    report.bias_term = r2 * exact_sq_opnorm(root * (c - Matrix::Identity(d, d)));
    report.variance_term = (w * c).cwiseProduct(c * q).sum();
    report.objective = report.bias_term + report.variance_term;
  };

  if (r == 0.0) {
    finalize(Matrix::Zero(d, d));
    return report;
  }
  if (q.norm() == 0.0) {
    finalize(Matrix::Identity(d, d));
    return report;
  }

  const Matrix root = psd_sqrt(prog.weight).mat();
  const double lmax_w = exact_sq_opnorm(root);  // = lambda_max(weight)
  Eigen::SelfAdjointEigenSolver<Matrix> esq(q, Eigen::EigenvaluesOnly);
  const double lmax_q = std::max(esq.eigenvalues().maxCoeff(), 0.0);
  const double trace_qw = (w.cwiseProduct(q)).sum();

  // Objective scale for the smoothing continuation: the cheaper of the two
  // trivial estimators C = 0 and C = I upper-bounds the optimum.
  double scale = 0.0;
  if (r2 * lmax_w > 0.0 && trace_qw > 0.0) {
    scale = std::min(r2 * lmax_w, trace_qw);
  } else {
    scale = std::max(r2 * lmax_w, trace_qw);
  }
  if (!(scale > 0.0)) scale = 1.0;

  Matrix c = warm_start;
  const Matrix identity = Matrix::Identity(d, d);
  int total_iters = 0;
  bool converged = true;

  for (double factor : kContinuation) {
    const double mu = factor * scale;
    const auto eval = [&](const Matrix& x, Matrix* grad) -> double {
      const Matrix b = r * (root * (x - identity));
      const Matrix xq = x * q;
      const double tr = (w * x).cwiseProduct(xq).sum();
      if (grad == nullptr) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(b.transpose() * b),
                                                 Eigen::EigenvaluesOnly);
        const Vector& lam = es.eigenvalues();
        const double lmax = lam.maxCoeff();
        return lmax + mu * std::log(((lam.array() - lmax) / mu).exp().sum()) + tr;
      }
      const SoftMaxEig sm = softmax_psd(Matrix(b.transpose() * b), mu);
      *grad = 2.0 * r2 * (w * ((x - identity) * sm.p)) + 2.0 * (w * xq);
      return sm.value + tr;
    };

    const Matrix b0 = r * (root * (c - identity));
    const double curv =
        2.0 * (r2 * lmax_w * (1.0 + 2.0 * exact_sq_opnorm(b0) / mu) + lmax_w * lmax_q);
    const double init_step = 1.0 / std::max(curv, 1e-300);
    bool plateaued = false;
    const int budget = (kMaxIterations - total_iters) / 2 + 200;
    total_iters += backtracking_gd(eval, &c, init_step, std::min(budget, kMaxIterations - total_iters),
                                   &plateaued);
    if (!plateaued) converged = false;
    if (total_iters >= kMaxIterations) break;
  }

  finalize(c);
  report.iterations = total_iters;
  report.converged = converged;
  return report;
}

ModelShiftSolution solve_model_shift_program(const SymMatrix& sigma_s_hat,
                                             const SymMatrix& sigma_t_hat,
                                             const SymMatrix& sigma_t, long n_s, long n_t,
                                             double noise_std, double radius_r,
                                             double radius_gamma) {
  const Eigen::Index d = sigma_t.dim();
  if (sigma_s_hat.dim() != d || sigma_t_hat.dim() != d) {
    throw std::invalid_argument("solve_model_shift_program: dims differ");
  }
  if (n_s < 1) throw std::invalid_argument("solve_model_shift_program: n_s must be >= 1");
  if (n_t < 1) {
    throw std::invalid_argument(
        "solve_model_shift_program: n_t must be >= 1 (the sigma^2/n_T term is undefined; use "
        "the pure covariate-shift path instead)");
  }
  if (radius_r < 0.0 || radius_gamma < 0.0) {
    throw std::invalid_argument("solve_model_shift_program: negative radius");
  }
  require_psd(sigma_t, "solve_model_shift_program sigma_t");

  const double sig2 = noise_std * noise_std;
  const Matrix qs = sig2 / static_cast<double>(n_s) * pseudo_inverse(sigma_s_hat).mat();
  const Matrix qt = sig2 / static_cast<double>(n_t) * pseudo_inverse(sigma_t_hat).mat();
  const Matrix root = psd_sqrt(sigma_t).mat();
  const Matrix& tmat = sigma_t.mat();
  const double r2 = radius_r * radius_r;
  const double g2 = radius_gamma * radius_gamma;
  const Matrix identity = Matrix::Identity(d, d);

  ModelShiftSolution out;
  const auto finalize = [&](const Matrix& a1, const Matrix& a2) {
    out.a1 = a1;
    out.a2 = a2;
    out.report.coefficient = LinearCoefficient(Matrix(a1 + a2));
    out.report.bias_term = 2.0 * r2 * exact_sq_opnorm(root * (a1 + a2 - identity)) +
                           2.0 * g2 * exact_sq_opnorm(root * a1);
    out.report.variance_term =
        (a1 * qs).cwiseProduct(a1).sum() + (a2 * qt).cwiseProduct(a2).sum();
    out.report.objective = out.report.bias_term + out.report.variance_term;
  };

  if (r2 == 0.0) {
    finalize(Matrix::Zero(d, d), Matrix::Zero(d, d));
    return out;
  }

  const double lmax_t = exact_sq_opnorm(root);
  const double tr_qt = qt.trace();
  double scale = 2.0 * r2 * lmax_t;
  if (tr_qt > 0.0) scale = std::min(scale, tr_qt);
  if (!(scale > 0.0)) scale = 1.0;

  // Scalar warm start: the objective restricted to A_i = a_i I is an exact
  // two-variable quadratic; solve its normal equations.
  double a1_0 = 0.5, a2_0 = 0.5;
  {
    const double u = 2.0 * r2 * lmax_t;
    const double v = 2.0 * g2 * lmax_t + qs.trace();
    const double ww = qt.trace();
    if (ww > 0.0 && v > 0.0) {
      const double den = u * ww + v * ww + u * v;
      a1_0 = u * ww / den;
      a2_0 = u * v / den;
    } else if (ww == 0.0 && u > 0.0) {
      a1_0 = (v > 0.0) ? 0.0 : 0.5;
      a2_0 = 1.0 - a1_0;
    } else if (v == 0.0 && ww > 0.0) {
      // unpenalized A1: a1 + a2 solves u(s-1) + ww*a2 = 0 with a1 free on
      // the line; split evenly with a2 from the 1-d problem
      a2_0 = u / (u + ww);
      a1_0 = 1.0 - a2_0;
    }
  }

  // Stacked state [A1 | A2], d x 2d.
  Matrix state(d, 2 * d);
  state.leftCols(d) = a1_0 * identity;
  state.rightCols(d) = a2_0 * identity;

  int total_iters = 0;
  bool converged = true;
  for (double factor : kContinuation) {
    const double mu = factor * scale;
    const auto eval = [&](const Matrix& x, Matrix* grad) -> double {
      const Matrix a1 = x.leftCols(d);
      const Matrix a2 = x.rightCols(d);
      const Matrix m = a1 + a2 - identity;
      const Matrix b1 = std::sqrt(2.0) * radius_r * (root * m);
      const Matrix a1qs = a1 * qs;
      const Matrix a2qt = a2 * qt;
      const double tr = a1qs.cwiseProduct(a1).sum() + a2qt.cwiseProduct(a2).sum();
      double value = tr;
      if (grad == nullptr) {
        Eigen::SelfAdjointEigenSolver<Matrix> es1(Matrix(b1.transpose() * b1),
                                                  Eigen::EigenvaluesOnly);
        const Vector& lam1 = es1.eigenvalues();
        const double lmax1 = lam1.maxCoeff();
        value += lmax1 + mu * std::log(((lam1.array() - lmax1) / mu).exp().sum());
        if (g2 > 0.0) {
          const Matrix b2 = std::sqrt(2.0) * radius_gamma * (root * a1);
          Eigen::SelfAdjointEigenSolver<Matrix> es2(Matrix(b2.transpose() * b2),
                                                    Eigen::EigenvaluesOnly);
          const Vector& lam2 = es2.eigenvalues();
          const double lmax2 = lam2.maxCoeff();
          value += lmax2 + mu * std::log(((lam2.array() - lmax2) / mu).exp().sum());
        }
        return value;
      }
      grad->resize(d, 2 * d);
      const SoftMaxEig sm1 = softmax_psd(Matrix(b1.transpose() * b1), mu);
      value += sm1.value;
      const Matrix shared = 4.0 * r2 * (tmat * (m * sm1.p));
      grad->leftCols(d) = shared + 2.0 * a1qs;
      grad->rightCols(d) = shared + 2.0 * a2qt;
      if (g2 > 0.0) {
        const Matrix b2 = std::sqrt(2.0) * radius_gamma * (root * a1);
        const SoftMaxEig sm2 = softmax_psd(Matrix(b2.transpose() * b2), mu);
        value += sm2.value;
        grad->leftCols(d) += 4.0 * g2 * (tmat * (a1 * sm2.p));
      }
      return value;
    };

    const double b_now = 2.0 * r2 * exact_sq_opnorm(root * (state.leftCols(d) + state.rightCols(d) - identity)) +
                         2.0 * g2 * exact_sq_opnorm(root * state.leftCols(d));
    const double qmax = std::max(Eigen::SelfAdjointEigenSolver<Matrix>(qs, Eigen::EigenvaluesOnly)
                                     .eigenvalues()
                                     .maxCoeff(),
                                 Eigen::SelfAdjointEigenSolver<Matrix>(qt, Eigen::EigenvaluesOnly)
                                     .eigenvalues()
                                     .maxCoeff());
    const double curv = 4.0 * ((2.0 * r2 + 2.0 * g2) * lmax_t * (1.0 + 2.0 * b_now / mu) + qmax);
    bool plateaued = false;
    const int budget = (kMaxIterations - total_iters) / 2 + 200;
    total_iters += backtracking_gd(eval, &state, 1.0 / std::max(curv, 1e-300),
                                   std::min(budget, kMaxIterations - total_iters), &plateaued);
    if (!plateaued) converged = false;
    if (total_iters >= kMaxIterations) break;
  }

  finalize(state.leftCols(d), state.rightCols(d));
  out.report.iterations = total_iters;
  out.report.converged = converged;
  return out;
}

}  // namespace mmshift
