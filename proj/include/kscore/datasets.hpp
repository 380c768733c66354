#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/Dense>

namespace kscore {

enum class DatasetName {
  two_moons,
  checkerboard,
  rings,
  spiral,
  swissroll2d,
  swissroll6d,
  gmm_ground_truth,
};

DatasetName dataset_from_string(const std::string& name);
std::string dataset_to_string(DatasetName name);

struct GmmComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct DatasetSpec {
  DatasetName name = DatasetName::two_moons;
  int n = 1;
  double noise = 0.0;  // std. dev. of isotropic Gaussian jitter
  std::uint64_t seed = 0;
  // gmm_ground_truth only; defaults to a single standard normal of dim gmm_dim.
  std::vector<GmmComponent> gmm;
  int gmm_dim = 2;
};

/// Samples are rows of `points` (n x d).
struct Dataset {
  Eigen::MatrixXd points;
  DatasetSpec spec;

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Deterministic generator for the named toy distributions. Exact
/// parameterizations (noise = 0 manifolds):
///   two_moons    upper arc (cos u, sin u), lower arc (1-cos u, 0.5-sin u),
///                u ~ U[0, pi], arc chosen by fair coin
///   rings        circles of radius 0.5 and 1.0, fair coin, angle U[0, 2pi)
///   spiral       (r cos u, r sin u), r = u/(3 pi), u ~ U[0, 3 pi]
///   checkerboard uniform over the 8 alternating unit squares of the 4x4
///                grid on [-2, 2]^2
///   swissroll2d  (u cos u, u sin u) / (4.5 pi), u ~ U[1.5 pi, 4.5 pi]
///   swissroll6d  (u cos u, h, u sin u)/10, u ~ U[1.5 pi, 4.5 pi],
///                h ~ U[0, 21], zero-padded to 6D and rotated by a fixed
///                orthogonal matrix shared across all seeds
///   gmm_ground_truth  explicit mixture from spec.gmm
/// N(0, noise^2 I) jitter is added to every point afterwards.
Dataset generate(const DatasetSpec& spec);

/// Seeded shuffle then disjoint split into floor(f*n) and n - floor(f*n) rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

/// N points drawn without replacement (seeded partial Fisher-Yates).
Eigen::MatrixXd subsample_centers(const Dataset& ds, int N, std::uint64_t seed);

/// Log-density of spec.gmm (oracle for tests); gmm_ground_truth specs only.
double gmm_log_density(const DatasetSpec& spec, const Eigen::VectorXd& x);

}  // namespace kscore
