#include "mmshift/modelshift.hpp"

#include <stdexcept>

#include "mmshift/covshift.hpp"

namespace mmshift {

ModelShiftEstimator fit_model_shift(const Matrix& x_s, const Vector& y_s, const Matrix& x_t,
                                    const Vector& y_t, const SymMatrix& sigma_t,
                                    double noise_std, double radius_r, double radius_gamma) {
  if (x_s.rows() < 1 || x_t.rows() < 1) {
    throw std::invalid_argument("fit_model_shift: need labeled samples from both domains");
  }
  if (x_s.cols() != x_t.cols() || sigma_t.dim() != x_s.cols()) {
    throw std::invalid_argument("fit_model_shift: dimension mismatch");
  }
  const double ns = static_cast<double>(x_s.rows());
  const double nt = static_cast<double>(x_t.rows());
  const SymMatrix sigma_s_hat(Matrix(x_s.transpose() * x_s / ns));
  const SymMatrix sigma_t_hat(Matrix(x_t.transpose() * x_t / nt));

  ModelShiftEstimator est;
  est.radius_r = radius_r;
  est.radius_gamma = radius_gamma;
  est.beta_bar_s = pseudo_inverse(sigma_s_hat).mat() * (x_s.transpose() * y_s) / ns;
  est.beta_bar_t = pseudo_inverse(sigma_t_hat).mat() * (x_t.transpose() * y_t) / nt;

  ModelShiftSolution sol =
      solve_model_shift_program(sigma_s_hat, sigma_t_hat, sigma_t, x_s.rows(), x_t.rows(),
                                noise_std, radius_r, radius_gamma);
  est.a1 = sol.a1;
  est.a2 = sol.a2;
  est.report = sol.report;
  return est;
}

Vector predict(const ModelShiftEstimator& est, const Vector& beta_bar_s,
               const Vector& beta_bar_t) {
  if (beta_bar_s.size() != est.a1.cols() || beta_bar_t.size() != est.a2.cols()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  return est.a1 * beta_bar_s + est.a2 * beta_bar_t;
}

}  // namespace mmshift
