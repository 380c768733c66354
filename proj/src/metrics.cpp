#include "kscore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kscore/parallel.hpp"
#include "kscore/rng.hpp"

namespace kscore {

double nll(const KernelModel& model, const Eigen::MatrixXd& heldout) {
  if (heldout.rows() < 1) throw std::domain_error("nll: empty held-out set");
  if (heldout.cols() != model.dim()) throw std::invalid_argument("nll: dimension mismatch");
  const KernelModel::Evolved ev = model.evolved(NoiseTime{0.0});
  const double total = parallel_reduce<double>(
      heldout.rows(), 0.0,
      [&](std::int64_t begin, std::int64_t end) {
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i)
          acc -= model.log_density(ev, heldout.row(i).transpose());
        return acc;
      },
      std::plus<double>());
  return total / heldout.rows();
}

double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                     double bandwidth) {
  const int m = static_cast<int>(x.rows());
  const int n = static_cast<int>(y.rows());
  if (m < 2 || n < 2) throw std::domain_error("mmd2_unbiased: need m, n >= 2");
  if (x.cols() != y.cols()) throw std::invalid_argument("mmd2_unbiased: dim mismatch");
  if (!(bandwidth > 0.0)) throw std::domain_error("mmd2_unbiased: bandwidth must be > 0");
  const double inv = -1.0 / (2.0 * bandwidth * bandwidth);

  const double xx = parallel_reduce<double>(
      m, 0.0,
      [&](std::int64_t begin, std::int64_t end) {
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i)
          for (int j = 0; j < m; ++j)
            if (j != i) acc += std::exp(inv * (x.row(i) - x.row(j)).squaredNorm());
        return acc;
      },
      std::plus<double>());
  const double yy = parallel_reduce<double>(
      n, 0.0,
      [&](std::int64_t begin, std::int64_t end) {
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i)
          for (int j = 0; j < n; ++j)
            if (j != i) acc += std::exp(inv * (y.row(i) - y.row(j)).squaredNorm());
        return acc;
      },
      std::plus<double>());
  const double xy = parallel_reduce<double>(
      m, 0.0,
      [&](std::int64_t begin, std::int64_t end) {
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i)
          for (int j = 0; j < n; ++j)
            acc += std::exp(inv * (x.row(i) - y.row(j)).squaredNorm());
        return acc;
      },
      std::plus<double>());
  return xx / (static_cast<double>(m) * (m - 1)) +
         yy / (static_cast<double>(n) * (n - 1)) - 2.0 * xy / (static_cast<double>(m) * n);
}

double median_heuristic_bandwidth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  std::uint64_t seed) {
  const int total = static_cast<int>(x.rows() + y.rows());
  const int keep = std::min(total, 2000);
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).split(streams::kMetrics);
  for (int i = 0; i < keep; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(total - i));
    std::swap(idx[i], idx[j]);
  }
  const auto row = [&](int k) {
    return k < x.rows() ? x.row(k) : y.row(k - static_cast<int>(x.rows()));
  };
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(keep) * (keep - 1) / 2);
  for (int i = 0; i < keep; ++i)
    for (int j = i + 1; j < keep; ++j)
      dists.push_back((row(idx[i]) - row(idx[j])).norm());
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

double mmd2_unbiased_median(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            std::uint64_t seed, double* bandwidth_out) {
  const double h = median_heuristic_bandwidth(x, y, seed);
  if (bandwidth_out) *bandwidth_out = h;
  return mmd2_unbiased(x, y, h);
}

namespace {
double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::domain_error("quantile of empty vector");
  const double pos = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace

NnStats nn_distance_stats(const Eigen::MatrixXd& samples,
                          const Eigen::MatrixXd& reference) {
  if (samples.rows() < 1 || reference.rows() < 1)
    throw std::domain_error("nn_distance_stats: empty input");
  NnStats stats;
  stats.distances.resize(samples.rows());
  parallel_for(samples.rows(), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < reference.rows(); ++j)
        best = std::min(best, (samples.row(i) - reference.row(j)).squaredNorm());
      stats.distances[i] = std::sqrt(best);
    }
  });
  std::vector<double> sorted(stats.distances.data(),
                             stats.distances.data() + stats.distances.size());
  std::sort(sorted.begin(), sorted.end());
  stats.median = quantile_sorted(sorted, 0.5);
  stats.q25 = quantile_sorted(sorted, 0.25);
  stats.q75 = quantile_sorted(sorted, 0.75);
  return stats;
}

std::vector<Ellipse> ellipses(const KernelModel& model, int k, std::uint64_t seed) {
  if (k < 0 || k > model.num_centers())
    throw std::domain_error("ellipses: need 0 <= k <= N");
  std::vector<int> idx(model.num_centers());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).split(streams::kCenters);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(model.num_centers() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<Ellipse> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.covariance(idx[i]));
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("ellipses: eigendecomposition failed");
    out.push_back(Ellipse{model.centers().row(idx[i]).transpose(), eig.eigenvalues(),
                          eig.eigenvectors()});
  }
  return out;
}

}  // namespace kscore
