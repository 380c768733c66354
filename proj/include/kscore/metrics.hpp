#pragma once

#include <cstdint>
#include <vector>

#include "kscore/kernel_model.hpp"

namespace kscore {

/// Held-out negative log-likelihood, -mean log pi_hat(x_j) at s = 0, nats/point.
double nll(const KernelModel& model, const Eigen::MatrixXd& heldout);

/// Unbiased MMD^2 U-statistic with Gaussian kernel exp(-|a-b|^2 / (2 h^2)).
double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                     double bandwidth);

/// Median pairwise distance of the union, computed on at most 2000 seeded
/// subsampled points.
double median_heuristic_bandwidth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  std::uint64_t seed);

/// mmd2_unbiased with the median-heuristic bandwidth; the bandwidth used is
/// reported through *bandwidth_out when non-null.
double mmd2_unbiased_median(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            std::uint64_t seed, double* bandwidth_out = nullptr);

struct NnStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  Eigen::VectorXd distances;  // per-sample nearest-reference distance
};

/// Exhaustive nearest-neighbor distances of each sample to the reference set.
NnStats nn_distance_stats(const Eigen::MatrixXd& samples,
                          const Eigen::MatrixXd& reference);

struct Ellipse {
  Eigen::VectorXd center;
  Eigen::VectorXd eigvals;  // of the covariance Gamma^-1, ascending
  Eigen::MatrixXd eigvecs;  // columns matching eigvals
};

/// Eigendecomposition of the local covariance at k seeded kernel centers.
std::vector<Ellipse> ellipses(const KernelModel& model, int k, std::uint64_t seed);

}  // namespace kscore
