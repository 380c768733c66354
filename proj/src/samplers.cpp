#include "kscore/samplers.hpp"

#include <cmath>

#include "kscore/core_math.hpp"
#include "kscore/parallel.hpp"
#include "kscore/training.hpp"

namespace kscore {

Eigen::MatrixXd ScoreField::evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  parallel_for(x.rows(), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out.row(i) = evaluate(x.row(i).transpose(), s).transpose();
  });
  return out;
}

Eigen::VectorXd KernelScoreField::evaluate(const Eigen::VectorXd& x, NoiseTime s) const {
  return model_->score(x, s);
}

Eigen::MatrixXd KernelScoreField::evaluate_all(const Eigen::MatrixXd& x,
                                               NoiseTime s) const {
  const KernelModel::Evolved ev = model_->evolved(s);
  Eigen::MatrixXd out(x.rows(), x.cols());
  parallel_for(x.rows(), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out.row(i) = model_->score(ev, x.row(i).transpose()).transpose();
  });
  return out;
}

Eigen::MatrixXd sample_direct(const KernelModel& model, int n, Rng& rng) {
  const int d = model.dim();
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.uniform_below(model.num_centers()));
    out.row(i) = model.centers().row(c) +
                 (model.cov_sqrt(c) * rng.normal_vec(d)).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_reverse_sde(const ScoreField& field, Eigen::MatrixXd init,
                                   const SdeConfig& cfg) {
  if (cfg.n_steps < 1)
    throw std::invalid_argument("sample_reverse_sde: n_steps must be >= 1");
  if (!(cfg.eps_stop >= 0.0 && cfg.eps_stop < field.horizon()))
    throw std::invalid_argument("sample_reverse_sde: eps_stop outside [0, horizon)");
  const int n = static_cast<int>(init.rows());
  const int d = static_cast<int>(init.cols());
  const double horizon = field.horizon();
  const double beta = field.beta();
  const double dt = (horizon - cfg.eps_stop) / cfg.n_steps;
  const double diffusion = beta * std::sqrt(dt);

  // Noise drawn up front from per-trajectory streams; integration threads
  // then never touch an RNG.
  std::vector<Rng> traj_rng;
  traj_rng.reserve(n);
  const Rng base(cfg.seed);
  for (int i = 0; i < n; ++i)
    traj_rng.push_back(base.split(streams::kSampling).split(static_cast<std::uint64_t>(i)));

  Eigen::MatrixXd x = std::move(init);
  Eigen::MatrixXd noise(n, d);
  for (std::int64_t k = 0; k < cfg.n_steps; ++k) {
    const double s_k = horizon - k * dt;  // left endpoint
    const Eigen::MatrixXd drift = field.evaluate_all(x, NoiseTime{s_k});
    for (int i = 0; i < n; ++i)
      noise.row(i) = traj_rng[i].normal_vec(d).transpose();
    x += beta * beta * dt * drift + diffusion * noise;
    if (!x.allFinite())
      throw NumericalAbort(
          "sample_reverse_sde: non-finite state at step " + std::to_string(k), k, {});
  }
  return x;
}

Eigen::MatrixXd init_from_prior(const KernelModel& model, int n, Rng& rng) {
  const int d = model.dim();
  const double shift = model.beta() * model.beta() * model.horizon();
  std::vector<Eigen::MatrixXd> chol(model.num_centers());
  for (int i = 0; i < model.num_centers(); ++i) {
    Eigen::MatrixXd cov = model.covariance(i);
    cov.diagonal().array() += shift;
    chol[i] = spd_cholesky(cov);
  }
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.uniform_below(model.num_centers()));
    out.row(i) = model.centers().row(c) + (chol[c] * rng.normal_vec(d)).transpose();
  }
  return out;
}

Eigen::MatrixXd init_from_prior_moments(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& cov, double beta,
                                        double horizon, int n, Rng& rng) {
  const int d = static_cast<int>(mean.size());
  Eigen::MatrixXd noised = cov;
  noised.diagonal().array() += beta * beta * horizon;
  const Eigen::MatrixXd chol = spd_cholesky(noised);
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i)
    out.row(i) = mean.transpose() + (chol * rng.normal_vec(d)).transpose();
  return out;
}

}  // namespace kscore
