#pragma once

#include <functional>
#include <Eigen/Dense>

namespace kscore {

inline constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

/// Gaussian heat kernel G_{gamma,t}(y, y2) = (4*pi*gamma*t)^(-d/2)
/// * exp(-|y - y2|^2 / (4*gamma*t)). Green's function of
/// d/dt u = gamma * Laplace(u).
double heat_kernel(double gamma, double t, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& y2);

double log_heat_kernel(double gamma, double t, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& y2);

/// log(sum_i exp(v_i)) with max-shift. Returns -inf iff every entry is -inf.
double log_sum_exp(const Eigen::VectorXd& v);
double log_sum_exp(const double* v, int n);

// --- packed lower-triangular storage -------------------------------------
//
// A d x d lower-triangular factor is packed row-major into d(d+1)/2 slots:
// row r occupies [r(r+1)/2, r(r+1)/2 + r]. Diagonal slots carry positive
// entries by invariant.

inline int packed_size(int d) { return d * (d + 1) / 2; }
inline int packed_index(int r, int c) { return r * (r + 1) / 2 + c; }
inline int packed_diag_index(int r) { return r * (r + 1) / 2 + r; }

Eigen::MatrixXd unpack_lower(const Eigen::VectorXd& packed, int d);
Eigen::VectorXd pack_lower(const Eigen::MatrixXd& lower);

/// Gamma = L * L^T from a packed Cholesky factor. Diagonal must be > 0.
Eigen::MatrixXd cholesky_to_precision(const Eigen::VectorXd& packed_chol, int d);

/// log det(L L^T) = 2 * sum_k log L_kk, straight off the packed diagonal.
double packed_log_det(const Eigen::VectorXd& packed_chol, int d);

/// Inverse of an SPD matrix via LLT. Throws std::domain_error when the
/// Cholesky factorization fails (input not SPD).
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& gamma);

/// Solves Gamma x = v for SPD Gamma via LLT.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& v);

/// Lower Cholesky factor of an SPD matrix; throws std::domain_error on failure.
Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& gamma);

/// Composite trapezoid rule with n+1 equispaced nodes on [a, b].
double trapezoid(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace kscore
