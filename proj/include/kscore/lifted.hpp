#pragma once

#include <vector>
#include <Eigen/Dense>

#include "kscore/kernel_model.hpp"

namespace kscore {

/// Shallow-network rewriting of the kernel score at s = 0: the per-center
/// log-weights become the affine map y(x) = A * lift(x) + b over the lifted
/// features [x (x) x; x], and the score is the softmax-weighted combination
/// of the columns of grad y. Rebuild after any parameter update.
struct LiftedForm {
  Eigen::MatrixXd A;  // N x (d^2 + d); row i = [-1/2 vec(Gamma_i), (Gamma_i Z_i)^T]
  Eigen::VectorXd b;  // N
  Eigen::MatrixXd centers;
  std::vector<Eigen::MatrixXd> precisions;
};

/// [x (x) x; x] with the Kronecker square laid out row-major (x_i x_j at i*d+j).
Eigen::VectorXd lift(const Eigen::VectorXd& x);

/// Builds A and b so that A * lift(x) + b reproduces the kernel model's
/// per-center log-weights at s = 0 exactly.
LiftedForm assemble(const KernelModel& model);

/// Per-center log-weights A * lift(x) + b.
Eigen::VectorXd lifted_log_weights(const LiftedForm& form, const Eigen::VectorXd& x);

/// Identical value to KernelModel::score(x, s = 0).
Eigen::VectorXd lifted_score(const LiftedForm& form, const Eigen::VectorXd& x);

}  // namespace kscore
