#include "kscore/baselines.hpp"

#include <cmath>

#include "kscore/core_math.hpp"

namespace kscore {

Eigen::VectorXd empirical_score(const EmpiricalScore& es, const Eigen::VectorXd& x,
                                NoiseTime s) {
  if (!(s.s > 0.0))
    throw std::domain_error("empirical_score: singular at s = 0, need s > 0");
  const int M = static_cast<int>(es.trainset.rows());
  if (M < 1) throw std::invalid_argument("empirical_score: empty trainset");
  const double b2s = es.beta * es.beta * s.s;
  Eigen::VectorXd logw(M);
  for (int i = 0; i < M; ++i)
    logw[i] = -(x - es.trainset.row(i).transpose()).squaredNorm() / (2.0 * b2s);
  const double m = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - m).exp();
  w /= w.sum();
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < M; ++i)
    score -= w[i] * (x - es.trainset.row(i).transpose());
  return score / b2s;
}

DsmScoreNet::DsmScoreNet(Mlp mlp, double beta, double horizon)
    : mlp_(std::move(mlp)), beta_(beta), horizon_(horizon) {
  if (mlp_.widths.front() != dim() + 1 || mlp_.widths.back() != dim())
    throw std::invalid_argument("DsmScoreNet: widths must run d+1 -> d");
  if (!(beta_ > 0.0) || !(horizon_ > 0.0))
    throw std::invalid_argument("DsmScoreNet: beta and horizon must be > 0");
}

DsmScoreNet DsmScoreNet::initialized(int d, std::uint64_t seed, double beta,
                                     double horizon, int hidden_width,
                                     int hidden_layers) {
  std::vector<int> widths;
  widths.push_back(d + 1);
  for (int l = 0; l < hidden_layers; ++l) widths.push_back(hidden_width);
  widths.push_back(d);
  return DsmScoreNet(Mlp::initialized(std::move(widths), seed), beta, horizon);
}

Eigen::VectorXd DsmScoreNet::evaluate(const Eigen::VectorXd& x, NoiseTime s) const {
  Eigen::MatrixXd input(1, x.size() + 1);
  input.row(0).head(x.size()) = x.transpose();
  input(0, x.size()) = s.s / horizon_;
  return mlp_.forward(input).row(0).transpose();
}

Eigen::MatrixXd DsmScoreNet::evaluate_all(const Eigen::MatrixXd& x, NoiseTime s) const {
  Eigen::MatrixXd input(x.rows(), x.cols() + 1);
  input.leftCols(x.cols()) = x;
  input.col(x.cols()).setConstant(s.s / horizon_);
  return mlp_.forward(input);
}

namespace {

// One DSM minibatch: inputs (y, s/T), noise xi and weights beta*sqrt(s).
struct DsmBatch {
  Eigen::MatrixXd input;  // B x (d+1)
  Eigen::MatrixXd xi;     // B x d
  Eigen::VectorXd scale;  // beta * sqrt(s_b)
};

DsmBatch make_dsm_batch(const Eigen::MatrixXd& y0, const Eigen::VectorXd& s,
                        double beta, double horizon, Rng& noise_rng) {
  const int B = static_cast<int>(y0.rows());
  const int d = static_cast<int>(y0.cols());
  DsmBatch out;
  out.input.resize(B, d + 1);
  out.xi.resize(B, d);
  out.scale.resize(B);
  for (int b = 0; b < B; ++b) {
    out.scale[b] = beta * std::sqrt(s[b]);
    out.xi.row(b) = noise_rng.normal_vec(d).transpose();
    out.input.row(b).head(d) = y0.row(b) + out.scale[b] * out.xi.row(b);
    out.input(b, d) = s[b] / horizon;
  }
  return out;
}

}  // namespace

double dsm_loss(const DsmScoreNet& net, const Eigen::MatrixXd& y0,
                const Eigen::VectorXd& s, Rng& noise_rng) {
  if (y0.rows() < 1) throw std::domain_error("dsm_loss: empty batch");
  if (s.size() != y0.rows()) throw std::invalid_argument("dsm_loss: s size mismatch");
  const DsmBatch batch = make_dsm_batch(y0, s, net.beta(), net.horizon(), noise_rng);
  const Eigen::MatrixXd out = net.mlp().forward(batch.input);
  double acc = 0.0;
  for (int b = 0; b < out.rows(); ++b)
    acc += (batch.scale[b] * out.row(b) + batch.xi.row(b)).squaredNorm();
  return acc / out.rows();
}

DsmScoreNet train_dsm(const Dataset& data, const DsmTrainConfig& cfg) {
  if (cfg.steps < 0) throw std::invalid_argument("train_dsm: steps must be >= 0");
  if (data.n() < 1) throw std::invalid_argument("train_dsm: empty training set");
  DsmScoreNet net = DsmScoreNet::initialized(data.dim(), cfg.seed, cfg.beta, cfg.horizon);
  Rng batch_rng = Rng(cfg.seed).split(streams::kBatches);
  AdamState state;
  const int d = data.dim();
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    Eigen::MatrixXd y0(cfg.batch_size, d);
    Eigen::VectorXd s(cfg.batch_size);
    std::vector<int> indices(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) {
      indices[b] = static_cast<int>(batch_rng.uniform_below(data.n()));
      y0.row(b) = data.points.row(indices[b]);
      s[b] = batch_rng.uniform(cfg.s_min, cfg.horizon);
    }
    const DsmBatch batch = make_dsm_batch(y0, s, cfg.beta, cfg.horizon, batch_rng);

    Tape tape;
    std::vector<int> leaves;
    const int input = tape.constant(batch.input);
    const int out = net.mlp().tape_forward(tape, input, leaves);
    const int loss_node = tape.scaled_residual_loss(out, batch.xi, batch.scale);
    const double loss = tape.scalar_value(loss_node);
    if (!std::isfinite(loss))
      throw NumericalAbort("train_dsm: non-finite loss at step " + std::to_string(step),
                           step, indices);
    tape.backward(loss_node);
    const Eigen::VectorXd grad = net.mlp().gather_grad(tape, leaves);

    Eigen::VectorXd params = net.mlp().params;
    if (cfg.optimizer == TrainConfig::Optimizer::adam)
      adam_step(params, grad, state, cfg);
    else
      sgd_step(params, grad, cfg.learning_rate);
    net.mlp().params = params;
  }
  return net;
}

}  // namespace kscore
