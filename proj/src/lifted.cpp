#include "kscore/lifted.hpp"

#include <cmath>

#include "kscore/core_math.hpp"

namespace kscore {

Eigen::VectorXd lift(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd out(d * d + d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[i * d + j] = x[i] * x[j];
  out.tail(d) = x;
  return out;
}

LiftedForm assemble(const KernelModel& model) {
  const int N = model.num_centers();
  const int d = model.dim();
  LiftedForm form;
  form.A.resize(N, d * d + d);
  form.b.resize(N);
  form.centers = model.centers();
  form.precisions.reserve(N);
  const double c0 = 0.5 * d * kLogTwoPi + std::log(static_cast<double>(N));
  for (int i = 0; i < N; ++i) {
    const Eigen::MatrixXd& gamma = model.precision(i);
    const Eigen::VectorXd z = model.centers().row(i).transpose();
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) form.A(i, r * d + c) = -0.5 * gamma(r, c);
    form.A.row(i).tail(d) = (gamma * z).transpose();
    form.b[i] = -0.5 * z.dot(gamma * z) + 0.5 * model.log_det(i) - c0;
    form.precisions.push_back(gamma);
  }
  return form;
}

Eigen::VectorXd lifted_log_weights(const LiftedForm& form, const Eigen::VectorXd& x) {
  return form.A * lift(x) + form.b;
}

Eigen::VectorXd lifted_score(const LiftedForm& form, const Eigen::VectorXd& x) {
  const Eigen::VectorXd y = lifted_log_weights(form, x);
  Eigen::VectorXd sig = (y.array() - y.maxCoeff()).exp();
  sig /= sig.sum();
  const int N = static_cast<int>(form.centers.rows());
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd u = x - form.centers.row(i).transpose();
    score.noalias() -= sig[i] * (form.precisions[i] * u);
  }
  return score;
}

}  // namespace kscore
