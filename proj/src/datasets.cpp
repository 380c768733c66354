#include "kscore/datasets.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kscore/core_math.hpp"
#include "kscore/rng.hpp"

namespace kscore {

DatasetName dataset_from_string(const std::string& name) {
  if (name == "two_moons") return DatasetName::two_moons;
  if (name == "checkerboard") return DatasetName::checkerboard;
  if (name == "rings") return DatasetName::rings;
  if (name == "spiral") return DatasetName::spiral;
  if (name == "swissroll2d") return DatasetName::swissroll2d;
  if (name == "swissroll6d") return DatasetName::swissroll6d;
  if (name == "gmm_ground_truth") return DatasetName::gmm_ground_truth;
  throw std::invalid_argument("unknown dataset: " + name);
}

std::string dataset_to_string(DatasetName name) {
  switch (name) {
    case DatasetName::two_moons: return "two_moons";
    case DatasetName::checkerboard: return "checkerboard";
    case DatasetName::rings: return "rings";
    case DatasetName::spiral: return "spiral";
    case DatasetName::swissroll2d: return "swissroll2d";
    case DatasetName::swissroll6d: return "swissroll6d";
    case DatasetName::gmm_ground_truth: return "gmm_ground_truth";
  }
  throw std::logic_error("dataset_to_string: bad enum");
}

namespace {

int dataset_dim(const DatasetSpec& spec) {
  switch (spec.name) {
    case DatasetName::swissroll6d: return 6;
    case DatasetName::gmm_ground_truth:
      return spec.gmm.empty() ? spec.gmm_dim
                              : static_cast<int>(spec.gmm.front().mean.size());
    default: return 2;
  }
}

// Orthogonal 6x6 embedding shared by every swissroll6d spec: QR of a
// Gaussian matrix drawn from a stream with a hardcoded seed, so differently
// seeded train/test sets live on the same embedded manifold.
const Eigen::MatrixXd& swissroll6d_rotation() {
  static const Eigen::MatrixXd rot = [] {
    Rng rng(0x5317550a11ULL);
    Eigen::MatrixXd g(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // Fix signs so Q is unique: positive diagonal of R.
    Eigen::MatrixXd r = q.transpose() * g;
    for (int c = 0; c < 6; ++c)
      if (r(c, c) < 0) q.col(c) *= -1.0;
    return q;
  }();
  return rot;
}

std::vector<GmmComponent> effective_gmm(const DatasetSpec& spec) {
  if (!spec.gmm.empty()) return spec.gmm;
  GmmComponent c;
  c.weight = 1.0;
  c.mean = Eigen::VectorXd::Zero(spec.gmm_dim);
  c.cov = Eigen::MatrixXd::Identity(spec.gmm_dim, spec.gmm_dim);
  return {c};
}

}  // namespace

Dataset generate(const DatasetSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("generate: n must be >= 1");
  if (spec.noise < 0.0) throw std::invalid_argument("generate: noise must be >= 0");

  const int d = dataset_dim(spec);
  Eigen::MatrixXd pts(spec.n, d);
  Rng rng = Rng(spec.seed).split(streams::kData);

  std::vector<GmmComponent> gmm;
  std::vector<Eigen::MatrixXd> gmm_chol;
  std::vector<double> gmm_cum;
  if (spec.name == DatasetName::gmm_ground_truth) {
    gmm = effective_gmm(spec);
    double total = 0.0;
    for (const auto& c : gmm) {
      if (!(c.weight > 0.0))
        throw std::invalid_argument("generate: gmm weights must be > 0");
      if (c.mean.size() != d || c.cov.rows() != d || c.cov.cols() != d)
        throw std::invalid_argument("generate: gmm component dims do not match");
      gmm_chol.push_back(spd_cholesky(c.cov));
      total += c.weight;
      gmm_cum.push_back(total);
    }
    for (double& w : gmm_cum) w /= total;
  }

  for (int i = 0; i < spec.n; ++i) {
    Eigen::VectorXd x(d);
    switch (spec.name) {
      case DatasetName::two_moons: {
        const double u = rng.uniform(0.0, M_PI);
        const bool upper = rng.uniform() < 0.5;
        if (upper)
          x << std::cos(u), std::sin(u);
        else
          x << 1.0 - std::cos(u), 0.5 - std::sin(u);
        break;
      }
      case DatasetName::rings: {
        const double r = rng.uniform() < 0.5 ? 0.5 : 1.0;
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        x << r * std::cos(a), r * std::sin(a);
        break;
      }
      case DatasetName::spiral: {
        const double u = rng.uniform(0.0, 3.0 * M_PI);
        const double r = u / (3.0 * M_PI);
        x << r * std::cos(u), r * std::sin(u);
        break;
      }
      case DatasetName::checkerboard: {
        // Alternating squares of the 4x4 grid on [-2,2]^2, (col+row) even.
        const int cell = static_cast<int>(rng.uniform_below(8));
        const int row = cell / 2;
        const int col = 2 * (cell % 2) + row % 2;
        x << -2.0 + col + rng.uniform(), -2.0 + row + rng.uniform();
        break;
      }
      case DatasetName::swissroll2d: {
        const double u = rng.uniform(1.5 * M_PI, 4.5 * M_PI);
        x << u * std::cos(u) / (4.5 * M_PI), u * std::sin(u) / (4.5 * M_PI);
        break;
      }
      case DatasetName::swissroll6d: {
        const double u = rng.uniform(1.5 * M_PI, 4.5 * M_PI);
        const double h = rng.uniform(0.0, 21.0);
        Eigen::VectorXd raw = Eigen::VectorXd::Zero(6);
        raw[0] = u * std::cos(u) / 10.0;
        raw[1] = h / 10.0;
        raw[2] = u * std::sin(u) / 10.0;
        x = swissroll6d_rotation() * raw;
        break;
      }
      case DatasetName::gmm_ground_truth: {
        const double p = rng.uniform();
        std::size_t k = 0;
        while (k + 1 < gmm_cum.size() && p >= gmm_cum[k]) ++k;
        x = gmm[k].mean + gmm_chol[k] * rng.normal_vec(d);
        break;
      }
    }
    if (spec.noise > 0.0) x += spec.noise * rng.normal_vec(d);
    pts.row(i) = x.transpose();
  }
  return Dataset{std::move(pts), spec};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  const int n = ds.n();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).split(streams::kSplit);
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
  const int n_train = static_cast<int>(std::floor(train_fraction * n));
  Eigen::MatrixXd a(n_train, ds.dim());
  Eigen::MatrixXd b(n - n_train, ds.dim());
  for (int i = 0; i < n_train; ++i) a.row(i) = ds.points.row(idx[i]);
  for (int i = n_train; i < n; ++i) b.row(i - n_train) = ds.points.row(idx[i]);
  return {Dataset{std::move(a), ds.spec}, Dataset{std::move(b), ds.spec}};
}

Eigen::MatrixXd subsample_centers(const Dataset& ds, int N, std::uint64_t seed) {
  if (N < 0 || N > ds.n())
    throw std::domain_error("subsample_centers: need 0 <= N <= |ds|");
  std::vector<int> idx(ds.n());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).split(streams::kCenters);
  for (int i = 0; i < N; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(
                          static_cast<std::uint64_t>(ds.n() - i)));
    std::swap(idx[i], idx[j]);
  }
  Eigen::MatrixXd centers(N, ds.dim());
  for (int i = 0; i < N; ++i) centers.row(i) = ds.points.row(idx[i]);
  return centers;
}

double gmm_log_density(const DatasetSpec& spec, const Eigen::VectorXd& x) {
  if (spec.name != DatasetName::gmm_ground_truth)
    throw std::invalid_argument("gmm_log_density: spec is not gmm_ground_truth");
  const auto gmm = effective_gmm(spec);
  const int d = static_cast<int>(x.size());
  double total = 0.0;
  for (const auto& c : gmm) total += c.weight;
  Eigen::VectorXd logs(gmm.size());
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(gmm[k].cov);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("gmm_log_density: component cov not SPD");
    const Eigen::VectorXd u = x - gmm[k].mean;
    const Eigen::VectorXd w = llt.matrixL().solve(u);
    double log_det = 0.0;
    for (int r = 0; r < d; ++r)
      log_det += 2.0 * std::log(Eigen::MatrixXd(llt.matrixL())(r, r));
    logs[static_cast<int>(k)] = std::log(gmm[k].weight / total) -
                                0.5 * (d * kLogTwoPi + log_det + w.squaredNorm());
  }
  return log_sum_exp(logs);
}

}  // namespace kscore
