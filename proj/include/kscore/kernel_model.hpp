#pragma once

#include <memory>
#include <vector>
#include <Eigen/Dense>

#include "kscore/precision.hpp"

namespace kscore {

/// Forward noising time s in [0, horizon]; the denoising clock t runs the
/// other way, s = horizon - t.
struct NoiseTime {
  double s = 0.0;
  static NoiseTime from_denoising(double t, double horizon) { return {horizon - t}; }
};

/// Equal-weight Gaussian mixture with one learned local precision per kernel
/// center, diffusion scale beta and horizon T. Closed under Brownian noising:
/// at noise time s every precision evolves to (Gamma^-1 + beta^2 s I)^-1, so
/// density, score and Laplacian are available in closed form for all s.
///
/// The model caches Gamma(Z_i), its inverse, Cholesky factors and log det per
/// center; call refresh_cache() after any provider parameter update before
/// evaluating (stale-cache evaluation is a contract violation).
class KernelModel {
 public:
  KernelModel(Eigen::MatrixXd centers, std::shared_ptr<PrecisionProvider> provider,
              double beta, double horizon);

  void refresh_cache();

  int num_centers() const { return static_cast<int>(centers_.rows()); }
  int dim() const { return static_cast<int>(centers_.cols()); }
  double beta() const { return beta_; }
  double horizon() const { return horizon_; }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const PrecisionProvider& provider() const { return *provider_; }
  const std::shared_ptr<PrecisionProvider>& provider_ptr() const { return provider_; }

  // cached s = 0 quantities
  const Eigen::MatrixXd& chol(int i) const { return chol_[i]; }
  const Eigen::MatrixXd& precision(int i) const { return precision_[i]; }
  const Eigen::MatrixXd& covariance(int i) const { return covariance_[i]; }
  /// Triangular square root R of the covariance (R R^T = Gamma^-1), used for
  /// sampling; computed as L^-T so it stays finite for arbitrarily
  /// ill-conditioned learned precisions.
  const Eigen::MatrixXd& cov_sqrt(int i) const { return cov_sqrt_[i]; }
  double log_det(int i) const { return log_det_[i]; }

  /// All per-center precisions evolved to a fixed noise time; the building
  /// block shared by every evaluation and by batched sampling.
  struct Evolved {
    double s = 0.0;
    std::vector<Eigen::MatrixXd> root;  // square roots, root root^T = Gamma_s(Z_i)
    std::vector<double> log_det;        // log det Gamma_s(Z_i)
    std::vector<double> trace;          // tr Gamma_s(Z_i)
  };
  Evolved evolved(NoiseTime s) const;

  double log_density(const Eigen::VectorXd& x, NoiseTime s) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x, NoiseTime s) const;
  double laplacian_ratio(const Eigen::VectorXd& x, NoiseTime s) const;
  /// Per-center softmax weights sigma(y(x)) at noise time s.
  Eigen::VectorXd softmax_weights(const Eigen::VectorXd& x, NoiseTime s) const;

  // same evaluations against a prebuilt snapshot (hot paths)
  double log_density(const Evolved& ev, const Eigen::VectorXd& x) const;
  Eigen::VectorXd score(const Evolved& ev, const Eigen::VectorXd& x) const;
  double laplacian_ratio(const Evolved& ev, const Eigen::VectorXd& x) const;

  /// U(x, t) = -beta^2 log eta(x, horizon - t) for denoising time t in [0, T].
  double potential(const Eigen::VectorXd& x, double t) const;

  /// r = -dU/dt + 1/2 |grad U|^2 - (beta^2/2) Lap U with dU/dt by central
  /// finite difference and the spatial terms in closed form. O(fd_step^2)
  /// for any model whose precisions evolve correctly.
  double hjb_residual(const Eigen::VectorXd& x, double t, double fd_step) const;

 private:
  Eigen::MatrixXd centers_;
  std::shared_ptr<PrecisionProvider> provider_;
  double beta_;
  double horizon_;

  std::vector<Eigen::MatrixXd> chol_;  // chol(Gamma) = decoded L
  std::vector<Eigen::MatrixXd> precision_;
  std::vector<Eigen::MatrixXd> covariance_;
  std::vector<Eigen::MatrixXd> cov_sqrt_;
  std::vector<double> log_det_;
  std::vector<double> trace_;
};

/// (Gamma^-1 + beta^2 s I)^-1 via Cholesky solves. s = 0 returns Gamma.
Eigen::MatrixXd evolve_precision(const Eigen::MatrixXd& gamma, double beta, double s);

}  // namespace kscore
