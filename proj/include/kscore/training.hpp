#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kscore/datasets.hpp"
#include "kscore/kernel_model.hpp"

namespace kscore {

struct TrainConfig {
  std::int64_t steps = 1000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta = 1.0;     // diffusion scale of the trained model
  double horizon = 1.0;  // noising horizon T
  enum class Optimizer { sgd, adam };
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::int64_t eval_every = 0;  // 0: record only the final row
  std::string checkpoint_path;  // written at every eval when nonempty
};

struct TrainReport {
  struct Row {
    std::int64_t step;
    double loss;     // mean batch loss since the previous row
    double nll;      // held-out NLL (NaN when no held-out set)
    double seconds;  // wall-clock since training start
  };
  std::vector<Row> rows;
};

/// Raised when a training loss goes non-finite; carries the step and the
/// offending batch row indices for diagnosis.
struct NumericalAbort : std::runtime_error {
  NumericalAbort(std::string msg, std::int64_t at_step, std::vector<int> batch);
  std::int64_t step;
  std::vector<int> batch_indices;
};

/// Terminal-time implicit score-matching objective,
/// mean_b [ 2 (pi^-1 Lap pi)(x_b) - |grad log pi(x_b)|^2 ] at s = 0.
/// Training never evaluates the loss at any other time.
double terminal_ism_loss(const KernelModel& model, const Eigen::MatrixXd& batch);

/// Quadrature oracle for the explicit score-matching objective in 1D:
/// integral of |score_model(x, 0) - d/dx log pi(x)|^2 pi(x) dx on [a, b].
double esm_loss_oracle(const KernelModel& model,
                       const std::function<double(double)>& true_density,
                       const std::function<double(double)>& true_score, double a,
                       double b, int n_intervals);

/// Quadrature form of the terminal ISM objective in 1D (population version
/// of terminal_ism_loss); differs from the ESM oracle by a theta-independent
/// constant, the Fisher information of pi.
double ism_loss_oracle(const KernelModel& model,
                       const std::function<double(double)>& true_density, double a,
                       double b, int n_intervals);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               const TrainConfig& cfg);
void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double learning_rate);

struct TrainResult {
  KernelModel model;
  TrainReport report;
};

/// Minibatch loop over the terminal ISM loss: seeded batches with
/// replacement, tape backward through the provider, optimizer step, cache
/// refresh. `heldout` (optional) feeds the NLL column of the report.
TrainResult train(const Dataset& data, Eigen::MatrixXd centers,
                  std::shared_ptr<PrecisionProvider> provider, const TrainConfig& cfg,
                  const Eigen::MatrixXd* heldout = nullptr);

}  // namespace kscore
