#pragma once

#include <cstdint>

#include "kscore/datasets.hpp"
#include "kscore/kernel_model.hpp"
#include "kscore/rng.hpp"
#include "kscore/training.hpp"

namespace kscore {

/// The memorizing baseline: the heat-smoothed empirical distribution over the
/// training set. Its score is defined for s > 0 only; the terminal time is a
/// sum of Dirac masses.
struct EmpiricalScore {
  Eigen::MatrixXd trainset;  // M x d
  double beta = 1.0;
  double horizon = 1.0;
};

/// grad log (G_{beta^2/2, s} * pi_hat)(x)
///   = -sum_i w_i(x) (x - Z_i) / (beta^2 s),
/// softmax weights w_i proportional to exp(-|x - Z_i|^2 / (2 beta^2 s)),
/// computed in log space. Throws std::domain_error for s <= 0.
Eigen::VectorXd empirical_score(const EmpiricalScore& es, const Eigen::VectorXd& x,
                                NoiseTime s);

/// Time-conditioned score net for the DSM baseline: x and s/T concatenated
/// feed a GeLU MLP [d+1, 64 x hidden_layers, d].
class DsmScoreNet {
 public:
  DsmScoreNet(Mlp mlp, double beta, double horizon);
  static DsmScoreNet initialized(int d, std::uint64_t seed, double beta, double horizon,
                                 int hidden_width = 64, int hidden_layers = 5);

  int dim() const { return mlp_.widths.front() - 1; }
  double beta() const { return beta_; }
  double horizon() const { return horizon_; }
  const Mlp& mlp() const { return mlp_; }
  Mlp& mlp() { return mlp_; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, NoiseTime s) const;
  Eigen::MatrixXd evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const;

 private:
  Mlp mlp_;
  double beta_;
  double horizon_;
};

/// Variance-weighted denoising score-matching loss over a batch of (Y0, s)
/// pairs: mean_b beta^2 s_b || net(y_b, s_b) + (y_b - Y0_b)/(beta^2 s_b) ||^2
/// with y_b = Y0_b + beta sqrt(s_b) xi_b, xi_b drawn from noise_rng.
double dsm_loss(const DsmScoreNet& net, const Eigen::MatrixXd& y0,
                const Eigen::VectorXd& s, Rng& noise_rng);

struct DsmTrainConfig : TrainConfig {
  double s_min = 1e-3;  // lower bound of the sampled noise times
};

/// Same loop shape as train(): seeded (Y0, s, xi) batches, tape backward,
/// optimizer step.
DsmScoreNet train_dsm(const Dataset& data, const DsmTrainConfig& cfg);

}  // namespace kscore
