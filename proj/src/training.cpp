#include "kscore/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "kscore/core_math.hpp"
#include "kscore/model_io.hpp"
#include "kscore/rng.hpp"

namespace kscore {

NumericalAbort::NumericalAbort(std::string msg, std::int64_t at_step, std::vector<int> batch)
    : std::runtime_error(std::move(msg)), step(at_step), batch_indices(std::move(batch)) {}

double terminal_ism_loss(const KernelModel& model, const Eigen::MatrixXd& batch) {
  if (batch.rows() < 1) throw std::domain_error("terminal_ism_loss: empty batch");
  if (batch.cols() != model.dim())
    throw std::invalid_argument("terminal_ism_loss: dimension mismatch");
  const KernelModel::Evolved ev = model.evolved(NoiseTime{0.0});
  double acc = 0.0;
  for (int b = 0; b < batch.rows(); ++b) {
    const Eigen::VectorXd x = batch.row(b).transpose();
    acc += 2.0 * model.laplacian_ratio(ev, x) - model.score(ev, x).squaredNorm();
  }
  return acc / batch.rows();
}

double esm_loss_oracle(const KernelModel& model,
                       const std::function<double(double)>& true_density,
                       const std::function<double(double)>& true_score, double a,
                       double b, int n_intervals) {
  if (model.dim() != 1) throw std::invalid_argument("esm_loss_oracle: d must be 1");
  const KernelModel::Evolved ev = model.evolved(NoiseTime{0.0});
  return trapezoid(
      [&](double x) {
        Eigen::VectorXd xv(1);
        xv[0] = x;
        const double diff = model.score(ev, xv)[0] - true_score(x);
        return diff * diff * true_density(x);
      },
      a, b, n_intervals);
}

double ism_loss_oracle(const KernelModel& model,
                       const std::function<double(double)>& true_density, double a,
                       double b, int n_intervals) {
  if (model.dim() != 1) throw std::invalid_argument("ism_loss_oracle: d must be 1");
  const KernelModel::Evolved ev = model.evolved(NoiseTime{0.0});
  return trapezoid(
      [&](double x) {
        Eigen::VectorXd xv(1);
        xv[0] = x;
        const double sc = model.score(ev, xv)[0];
        return (2.0 * model.laplacian_ratio(ev, xv) - sc * sc) * true_density(x);
      },
      a, b, n_intervals);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               const TrainConfig& cfg) {
  if (grad.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.size() == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state shape mismatch");
  state.t += 1;
  state.m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * grad;
  state.v = cfg.adam_beta2 * state.v.array().matrix() +
            (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  params.array() -= cfg.learning_rate * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + cfg.adam_eps);
}

void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double learning_rate) {
  if (grad.size() != params.size()) throw std::invalid_argument("sgd_step: shape mismatch");
  params -= learning_rate * grad;
}

namespace {

double heldout_nll(const KernelModel& model, const Eigen::MatrixXd& heldout) {
  const KernelModel::Evolved ev = model.evolved(NoiseTime{0.0});
  double acc = 0.0;
  for (int i = 0; i < heldout.rows(); ++i)
    acc -= model.log_density(ev, heldout.row(i).transpose());
  return acc / heldout.rows();
}

}  // namespace

TrainResult train(const Dataset& data, Eigen::MatrixXd centers,
                  std::shared_ptr<PrecisionProvider> provider, const TrainConfig& cfg,
                  const Eigen::MatrixXd* heldout) {
  if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (data.n() < 1) throw std::invalid_argument("train: empty training set");

  KernelModel model(std::move(centers), provider, cfg.beta, cfg.horizon);
  TrainReport report;
  Rng batch_rng = Rng(cfg.seed).split(streams::kBatches);
  AdamState state;
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const auto record = [&](std::int64_t step, double mean_loss) {
    const double nll = heldout ? heldout_nll(model, *heldout)
                               : std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back({step, mean_loss, nll, elapsed()});
    if (!cfg.checkpoint_path.empty()) save_model(model, cfg.checkpoint_path);
  };

  double loss_acc = 0.0;
  std::int64_t loss_count = 0;
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    std::vector<int> indices(cfg.batch_size);
    Eigen::MatrixXd batch(cfg.batch_size, model.dim());
    for (int b = 0; b < cfg.batch_size; ++b) {
      indices[b] = static_cast<int>(batch_rng.uniform_below(data.n()));
      batch.row(b) = data.points.row(indices[b]);
    }

    Tape tape;
    std::vector<int> leaves;
    const int decoded = provider->tape_decode(tape, model.centers(), leaves);
    const int loss_node = tape.ism_terminal_loss(decoded, model.centers(), batch);
    const double loss = tape.scalar_value(loss_node);
    if (!std::isfinite(loss))
      throw NumericalAbort("train: non-finite loss at step " + std::to_string(step),
                           step, indices);
    tape.backward(loss_node);
    const Eigen::VectorXd grad = provider->gather_grad(tape, leaves);

    Eigen::VectorXd params = provider->params();
    if (cfg.optimizer == TrainConfig::Optimizer::adam)
      adam_step(params, grad, state, cfg);
    else
      sgd_step(params, grad, cfg.learning_rate);
    provider->set_params(params);
    model.refresh_cache();

    loss_acc += loss;
    loss_count += 1;
    if (cfg.eval_every > 0 && step % cfg.eval_every == 0) {
      record(step, loss_acc / loss_count);
      loss_acc = 0.0;
      loss_count = 0;
    }
  }
  if (report.rows.empty() || report.rows.back().step != cfg.steps)
    record(cfg.steps, loss_count > 0 ? loss_acc / loss_count
                                     : std::numeric_limits<double>::quiet_NaN());
  return TrainResult{std::move(model), std::move(report)};
}

}  // namespace kscore
