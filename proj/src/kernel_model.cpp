#include "kscore/kernel_model.hpp"

#include <cmath>
#include <stdexcept>

#include "kscore/core_math.hpp"

namespace kscore {

Eigen::MatrixXd evolve_precision(const Eigen::MatrixXd& gamma, double beta, double s) {
  if (s < 0.0) throw std::domain_error("evolve_precision: s must be >= 0");
  if (s == 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("evolve_precision: input is not SPD");
    return gamma;
  }
  Eigen::MatrixXd a = spd_inverse(gamma);
  a.diagonal().array() += beta * beta * s;
  return spd_inverse(a);
}

KernelModel::KernelModel(Eigen::MatrixXd centers,
                         std::shared_ptr<PrecisionProvider> provider, double beta,
                         double horizon)
    : centers_(std::move(centers)),
      provider_(std::move(provider)),
      beta_(beta),
      horizon_(horizon) {
  if (centers_.rows() < 1) throw std::invalid_argument("KernelModel: need N >= 1");
  if (provider_->dim() != dim())
    throw std::invalid_argument("KernelModel: provider dimension mismatch");
  if (!(beta_ > 0.0) || !(horizon_ > 0.0))
    throw std::invalid_argument("KernelModel: beta and horizon must be > 0");
  refresh_cache();
}

void KernelModel::refresh_cache() {
  const int N = num_centers();
  const int d = dim();
  const Eigen::MatrixXd decoded = provider_->decode_chol(centers_);
  chol_.resize(N);
  precision_.resize(N);
  covariance_.resize(N);
  cov_sqrt_.resize(N);
  log_det_.resize(N);
  trace_.resize(N);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < N; ++i) {
    chol_[i] = unpack_lower(decoded.row(i).transpose(), d);
    precision_[i] = chol_[i] * chol_[i].transpose();
    // Everything downstream comes from L by triangular solves; the positive
    // decoded diagonal keeps these finite even when Gamma is numerically
    // singular, where a fresh LLT of Gamma^-1 would fail.
    const Eigen::MatrixXd l_inv =
        chol_[i].triangularView<Eigen::Lower>().solve(eye);
    covariance_[i] = l_inv.transpose() * l_inv;
    cov_sqrt_[i] = l_inv.transpose();
    log_det_[i] = packed_log_det(decoded.row(i).transpose(), d);
    trace_[i] = precision_[i].trace();
  }
}

KernelModel::Evolved KernelModel::evolved(NoiseTime s) const {
  if (s.s < 0.0) throw std::domain_error("KernelModel::evolved: s must be >= 0");
  const int N = num_centers();
  const int d = dim();
  Evolved ev;
  ev.s = s.s;
  ev.root.resize(N);
  ev.log_det.resize(N);
  ev.trace.resize(N);
  if (s.s == 0.0) {
    for (int i = 0; i < N; ++i) {
      ev.root[i] = chol_[i];
      ev.log_det[i] = log_det_[i];
      ev.trace[i] = trace_[i];
    }
    return ev;
  }
  const double shift = beta_ * beta_ * s.s;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < N; ++i) {
    // A = Gamma^-1 + beta^2 s I and Gamma_s = A^-1 = M^-T M^-1 for A = M M^T,
    // so M^-T is a square root of Gamma_s. The beta^2 s shift keeps A well
    // conditioned for any learned Gamma.
    Eigen::MatrixXd a = covariance_[i];
    a.diagonal().array() += shift;
    const Eigen::MatrixXd m = spd_cholesky(a);
    const Eigen::MatrixXd m_inv = m.triangularView<Eigen::Lower>().solve(eye);
    ev.root[i] = m_inv.transpose();
    double half_log_det_a = 0.0;
    for (int r = 0; r < d; ++r) half_log_det_a += std::log(m(r, r));
    ev.log_det[i] = -2.0 * half_log_det_a;  // log det Gamma_s = -log det A
    ev.trace[i] = ev.root[i].squaredNorm();
  }
  return ev;
}

namespace {

// Per-center log-weights y_i and, optionally, score vectors g_i = -Gamma_s u_i
// and their squared norms. The normalized-mixture convention: y_i =
// -1/2 u^T Gamma_s u + 1/2 log det Gamma_s - (d/2) log 2pi - log N.
struct Components {
  Eigen::VectorXd y;
  Eigen::MatrixXd g;    // d x N, filled when needed
  Eigen::VectorXd gsq;  // |g_i|^2
};

Components compute_components(const KernelModel::Evolved& ev,
                              const Eigen::MatrixXd& centers,
                              const Eigen::VectorXd& x, bool need_score) {
  const int N = static_cast<int>(centers.rows());
  const int d = static_cast<int>(centers.cols());
  const double c0 = 0.5 * d * kLogTwoPi + std::log(static_cast<double>(N));
  Components out;
  out.y.resize(N);
  if (need_score) {
    out.g.resize(d, N);
    out.gsq.resize(N);
  }
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd u = x - centers.row(i).transpose();
    const Eigen::VectorXd w = ev.root[i].transpose() * u;
    out.y[i] = -0.5 * w.squaredNorm() + 0.5 * ev.log_det[i] - c0;
    if (need_score) {
      out.g.col(i) = -(ev.root[i] * w);
      out.gsq[i] = out.g.col(i).squaredNorm();
    }
  }
  return out;
}

Eigen::VectorXd softmax_of(const Eigen::VectorXd& y) {
  Eigen::VectorXd sig = (y.array() - y.maxCoeff()).exp();
  sig /= sig.sum();
  return sig;
}

}  // namespace

double KernelModel::log_density(const Evolved& ev, const Eigen::VectorXd& x) const {
  return log_sum_exp(compute_components(ev, centers_, x, false).y);
}

Eigen::VectorXd KernelModel::score(const Evolved& ev, const Eigen::VectorXd& x) const {
  const Components c = compute_components(ev, centers_, x, true);
  return c.g * softmax_of(c.y);
}

double KernelModel::laplacian_ratio(const Evolved& ev, const Eigen::VectorXd& x) const {
  const Components c = compute_components(ev, centers_, x, true);
  const Eigen::VectorXd sig = softmax_of(c.y);
  double acc = 0.0;
  for (int i = 0; i < num_centers(); ++i)
    acc += sig[i] * (c.gsq[i] - ev.trace[i]);
  return acc;
}

double KernelModel::log_density(const Eigen::VectorXd& x, NoiseTime s) const {
  return log_density(evolved(s), x);
}

Eigen::VectorXd KernelModel::score(const Eigen::VectorXd& x, NoiseTime s) const {
  return score(evolved(s), x);
}

double KernelModel::laplacian_ratio(const Eigen::VectorXd& x, NoiseTime s) const {
  return laplacian_ratio(evolved(s), x);
}

Eigen::VectorXd KernelModel::softmax_weights(const Eigen::VectorXd& x, NoiseTime s) const {
  return softmax_of(compute_components(evolved(s), centers_, x, false).y);
}

double KernelModel::potential(const Eigen::VectorXd& x, double t) const {
  if (t < 0.0 || t > horizon_)
    throw std::domain_error("KernelModel::potential: t outside [0, horizon]");
  return -beta_ * beta_ * log_density(x, NoiseTime{horizon_ - t});
}

double KernelModel::hjb_residual(const Eigen::VectorXd& x, double t, double fd_step) const {
  if (!(fd_step > 0.0) || t - fd_step < 0.0 || t + fd_step > horizon_)
    throw std::domain_error("KernelModel::hjb_residual: need t +- fd_step in [0, horizon]");
  const double du_dt =
      (potential(x, t + fd_step) - potential(x, t - fd_step)) / (2.0 * fd_step);
  const Evolved ev = evolved(NoiseTime::from_denoising(t, horizon_));
  const Eigen::VectorXd sc = score(ev, x);
  const double lap = laplacian_ratio(ev, x);
  const double b2 = beta_ * beta_;
  const double grad_u_sq = b2 * b2 * sc.squaredNorm();
  const double lap_u = -b2 * (lap - sc.squaredNorm());
  return -du_dt + 0.5 * grad_u_sq - 0.5 * b2 * lap_u;
}

}  // namespace kscore
