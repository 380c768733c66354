#pragma once

#include <cstdint>

#include "kscore/baselines.hpp"
#include "kscore/kernel_model.hpp"
#include "kscore/rng.hpp"

namespace kscore {

/// Time-indexed score field s(x, s) = grad_x log eta(x, s), the quantity the
/// reverse SDE consumes; the drift is beta^2 * evaluate(x, s).
class ScoreField {
 public:
  virtual ~ScoreField() = default;
  virtual int dim() const = 0;
  virtual double beta() const = 0;
  virtual double horizon() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& x, NoiseTime s) const = 0;
  /// Rows of X evaluated at one shared noise time (overridable hot path).
  virtual Eigen::MatrixXd evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const;
};

class KernelScoreField : public ScoreField {
 public:
  explicit KernelScoreField(const KernelModel& model) : model_(&model) {}
  int dim() const override { return model_->dim(); }
  double beta() const override { return model_->beta(); }
  double horizon() const override { return model_->horizon(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, NoiseTime s) const override;
  Eigen::MatrixXd evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const override;

 private:
  const KernelModel* model_;
};

class EmpiricalScoreField : public ScoreField {
 public:
  explicit EmpiricalScoreField(EmpiricalScore es) : es_(std::move(es)) {}
  int dim() const override { return static_cast<int>(es_.trainset.cols()); }
  double beta() const override { return es_.beta; }
  double horizon() const override { return es_.horizon; }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, NoiseTime s) const override {
    return empirical_score(es_, x, s);
  }

 private:
  EmpiricalScore es_;
};

class DsmScoreField : public ScoreField {
 public:
  explicit DsmScoreField(const DsmScoreNet& net) : net_(&net) {}
  int dim() const override { return net_->dim(); }
  double beta() const override { return net_->beta(); }
  double horizon() const override { return net_->horizon(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, NoiseTime s) const override {
    return net_->evaluate(x, s);
  }
  Eigen::MatrixXd evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const override {
    return net_->evaluate_all(x, s);
  }

 private:
  const DsmScoreNet* net_;
};

struct SdeConfig {
  std::int64_t n_steps = 500;
  double eps_stop = 0.0;  // stop at noise time s = eps_stop, in [0, horizon)
  std::uint64_t seed = 0;
};

/// Exact mixture draws: uniform center index, z ~ N(0, I), Z_i + chol(Gamma_i^-1) z.
/// No SDE simulation involved.
Eigen::MatrixXd sample_direct(const KernelModel& model, int n, Rng& rng);

/// Left-endpoint Euler-Maruyama for
///   dX = beta^2 * field(X, s) dt + beta dW,  t: 0 -> horizon - eps_stop,
/// s = horizon - t, uniform step. Rows of init are independent trajectories
/// with per-trajectory noise streams split from (seed, row), so results do
/// not depend on scheduling. Throws NumericalAbort on non-finite states.
Eigen::MatrixXd sample_reverse_sde(const ScoreField& field, Eigen::MatrixXd init,
                                   const SdeConfig& cfg);

/// Exact draws from the model's fully noised mixture at s = horizon:
/// mixture of N(Z_i, Gamma_i^-1 + beta^2 T I).
Eigen::MatrixXd init_from_prior(const KernelModel& model, int n, Rng& rng);

/// Moment-matched Gaussian prior N(mean, cov + beta^2 T I) for fields without
/// a closed-form noised density (empirical / DSM baselines).
Eigen::MatrixXd init_from_prior_moments(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& cov, double beta,
                                        double horizon, int n, Rng& rng);

}  // namespace kscore
