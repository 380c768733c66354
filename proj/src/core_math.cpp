#include "kscore/core_math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kscore {

double log_heat_kernel(double gamma, double t, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& y2) {
  if (!(gamma > 0.0)) throw std::domain_error("heat_kernel: gamma must be > 0");
  if (!(t > 0.0)) throw std::domain_error("heat_kernel: t must be > 0");
  if (y.size() != y2.size())
    throw std::invalid_argument("heat_kernel: dimension mismatch");
  const double d = static_cast<double>(y.size());
  const double four_gt = 4.0 * gamma * t;
  return -0.5 * d * std::log(M_PI * four_gt) - (y - y2).squaredNorm() / four_gt;
}

double heat_kernel(double gamma, double t, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& y2) {
  return std::exp(log_heat_kernel(gamma, t, y, y2));
}

double log_sum_exp(const double* v, int n) {
  if (n < 1) throw std::domain_error("log_sum_exp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf propagates)
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

double log_sum_exp(const Eigen::VectorXd& v) {
  return log_sum_exp(v.data(), static_cast<int>(v.size()));
}

Eigen::MatrixXd unpack_lower(const Eigen::VectorXd& packed, int d) {
  if (packed.size() != packed_size(d))
    throw std::invalid_argument("unpack_lower: packed size does not match d");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  int k = 0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c <= r; ++c) L(r, c) = packed[k++];
  return L;
}

Eigen::VectorXd pack_lower(const Eigen::MatrixXd& lower) {
  const int d = static_cast<int>(lower.rows());
  Eigen::VectorXd packed(packed_size(d));
  int k = 0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c <= r; ++c) packed[k++] = lower(r, c);
  return packed;
}

Eigen::MatrixXd cholesky_to_precision(const Eigen::VectorXd& packed_chol, int d) {
  for (int r = 0; r < d; ++r)
    if (!(packed_chol[packed_diag_index(r)] > 0.0))
      throw std::domain_error("cholesky_to_precision: nonpositive diagonal");
  const Eigen::MatrixXd L = unpack_lower(packed_chol, d);
  return L * L.transpose();
}

double packed_log_det(const Eigen::VectorXd& packed_chol, int d) {
  double acc = 0.0;
  for (int r = 0; r < d; ++r) {
    const double l = packed_chol[packed_diag_index(r)];
    if (!(l > 0.0))
      throw std::domain_error("packed_log_det: nonpositive diagonal");
    acc += std::log(l);
  }
  return 2.0 * acc;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& gamma) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("spd_inverse: matrix is not SPD");
  return llt.solve(Eigen::MatrixXd::Identity(gamma.rows(), gamma.cols()));
}

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& v) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("spd_solve: matrix is not SPD");
  return llt.solve(v);
}

Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& gamma) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("spd_cholesky: matrix is not SPD");
  return llt.matrixL();
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  if (n < 1) throw std::domain_error("trapezoid: need at least one interval");
  const double h = (b - a) / n;
  double acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

}  // namespace kscore
