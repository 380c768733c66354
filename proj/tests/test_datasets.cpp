#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "kscore/datasets.hpp"

using namespace kscore;

namespace {
DatasetSpec spec_of(DatasetName name, int n, double noise, std::uint64_t seed) {
  DatasetSpec s;
  s.name = name;
  s.n = n;
  s.noise = noise;
  s.seed = seed;
  return s;
}
}  // namespace

TEST_CASE("generators are deterministic functions of the spec") {
  for (const auto name : {DatasetName::two_moons, DatasetName::checkerboard,
                          DatasetName::rings, DatasetName::spiral,
                          DatasetName::swissroll2d, DatasetName::swissroll6d,
                          DatasetName::gmm_ground_truth}) {
    const DatasetSpec s = spec_of(name, 64, 0.05, 123);
    const Dataset a = generate(s), b = generate(s);
    CHECK((a.points - b.points).norm() == 0.0);
    const Dataset c = generate(spec_of(name, 64, 0.05, 124));
    CHECK((a.points - c.points).norm() != 0.0);
  }
}

TEST_CASE("noise-free manifolds are exact") {
  SUBCASE("two_moons lies on one of the two unit circles") {
    const Dataset ds = generate(spec_of(DatasetName::two_moons, 500, 0.0, 5));
    for (int i = 0; i < ds.n(); ++i) {
      const double x = ds.points(i, 0), y = ds.points(i, 1);
      const double r1 = std::abs(x * x + y * y - 1.0);
      const double r2 = std::abs((x - 1.0) * (x - 1.0) + (y - 0.5) * (y - 0.5) - 1.0);
      CHECK(std::min(r1, r2) < 1e-12);
      // upper arc has y >= 0, lower arc has y <= 0.5
      if (r1 < r2)
        CHECK(y >= -1e-12);
      else
        CHECK(y <= 0.5 + 1e-12);
    }
  }
  SUBCASE("rings lie on radius 0.5 or 1.0") {
    const Dataset ds = generate(spec_of(DatasetName::rings, 300, 0.0, 6));
    bool saw_inner = false, saw_outer = false;
    for (int i = 0; i < ds.n(); ++i) {
      const double r = ds.points.row(i).norm();
      CHECK(std::min(std::abs(r - 0.5), std::abs(r - 1.0)) < 1e-12);
      saw_inner = saw_inner || std::abs(r - 0.5) < 1e-6;
      saw_outer = saw_outer || std::abs(r - 1.0) < 1e-6;
    }
    CHECK(saw_inner);
    CHECK(saw_outer);
  }
  SUBCASE("spiral obeys r = u / (3 pi)") {
    const Dataset ds = generate(spec_of(DatasetName::spiral, 300, 0.0, 7));
    for (int i = 0; i < ds.n(); ++i) {
      const double r = ds.points.row(i).norm();
      CHECK(r <= 1.0 + 1e-12);
      // angle of the point must be congruent to 3 pi r (mod 2 pi)
      const double u = 3.0 * M_PI * r;
      const double ang = std::atan2(ds.points(i, 1), ds.points(i, 0));
      const double diff = std::remainder(u - ang, 2.0 * M_PI);
      CHECK(std::abs(diff) < 1e-9);
    }
  }
  SUBCASE("checkerboard occupies only alternating squares of [-2,2]^2") {
    const Dataset ds = generate(spec_of(DatasetName::checkerboard, 2000, 0.0, 8));
    std::set<std::pair<int, int>> cells;
    for (int i = 0; i < ds.n(); ++i) {
      const double x = ds.points(i, 0), y = ds.points(i, 1);
      CHECK(x >= -2.0);
      CHECK(x < 2.0);
      CHECK(y >= -2.0);
      CHECK(y < 2.0);
      const int col = static_cast<int>(std::floor(x + 2.0));
      const int row = static_cast<int>(std::floor(y + 2.0));
      CHECK((col + row) % 2 == 0);
      cells.insert({col, row});
    }
    CHECK(cells.size() == 8);  // all 8 alternating squares hit
  }
  SUBCASE("swissroll2d radius equals parameter over 4.5 pi") {
    const Dataset ds = generate(spec_of(DatasetName::swissroll2d, 200, 0.0, 9));
    for (int i = 0; i < ds.n(); ++i) {
      const double r = ds.points.row(i).norm() * 4.5 * M_PI;
      CHECK(r >= 1.5 * M_PI - 1e-9);
      CHECK(r <= 4.5 * M_PI + 1e-9);
    }
  }
  SUBCASE("swissroll6d has rank-3 covariance without noise") {
    const Dataset ds = generate(spec_of(DatasetName::swissroll6d, 4000, 0.0, 10));
    const Eigen::MatrixXd centered = ds.points.rowwise() - ds.points.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (ds.n() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd ev = eig.eigenvalues();  // ascending
    for (int k = 0; k < 3; ++k) CHECK(ev[k] < 1e-10 * ev[5]);
    CHECK(ev[3] > 1e-6 * ev[5]);
  }
  SUBCASE("swissroll6d manifold is shared across seeds") {
    const Dataset a = generate(spec_of(DatasetName::swissroll6d, 2000, 0.0, 1));
    const Dataset b = generate(spec_of(DatasetName::swissroll6d, 2000, 0.0, 2));
    // null directions of a's covariance are null for b's points too
    const Eigen::MatrixXd ca = a.points.rowwise() - a.points.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ca.transpose() * ca / (a.n() - 1));
    const Eigen::MatrixXd null_dirs = eig.eigenvectors().leftCols(3);
    const Eigen::MatrixXd cb = b.points.rowwise() - b.points.colwise().mean();
    CHECK((cb * null_dirs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gmm ground truth sampling matches its moments") {
  DatasetSpec s = spec_of(DatasetName::gmm_ground_truth, 100000, 0.0, 11);
  s.gmm_dim = 2;
  const Dataset ds = generate(s);
  const Eigen::VectorXd mean = ds.points.colwise().mean().transpose();
  for (int k = 0; k < 2; ++k) CHECK(std::abs(mean[k]) < 4.0 / std::sqrt(ds.n()));
  const Eigen::MatrixXd centered = ds.points.rowwise() - ds.points.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (ds.n() - 1);
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("split") {
  const Dataset ds = generate(spec_of(DatasetName::two_moons, 10, 0.0, 3));
  const auto [a, b] = split(ds, 0.5, 77);
  CHECK(a.n() == 5);
  CHECK(b.n() == 5);
  // union as multisets
  std::multiset<double> all, parts;
  for (int i = 0; i < ds.n(); ++i) all.insert(ds.points(i, 0));
  for (int i = 0; i < a.n(); ++i) parts.insert(a.points(i, 0));
  for (int i = 0; i < b.n(); ++i) parts.insert(b.points(i, 0));
  CHECK(all == parts);
  // same seed, same partition
  const auto [a2, b2] = split(ds, 0.5, 77);
  CHECK((a.points - a2.points).norm() == 0.0);
  CHECK_THROWS(split(ds, 0.0, 1));
  CHECK_THROWS(split(ds, 1.0, 1));
}

TEST_CASE("subsample_centers") {
  const Dataset ds = generate(spec_of(DatasetName::rings, 20, 0.0, 4));
  SUBCASE("N = n is a permutation") {
    const Eigen::MatrixXd c = subsample_centers(ds, 20, 5);
    std::multiset<double> all, got;
    for (int i = 0; i < 20; ++i) {
      all.insert(ds.points(i, 0));
      got.insert(c(i, 0));
    }
    CHECK(all == got);
  }
  SUBCASE("subset of the dataset, without replacement") {
    const Eigen::MatrixXd c = subsample_centers(ds, 7, 6);
    CHECK(c.rows() == 7);
    std::set<double> seen;
    for (int i = 0; i < 7; ++i) {
      bool found = false;
      for (int j = 0; j < ds.n(); ++j)
        found = found || (ds.points.row(j) - c.row(i)).norm() == 0.0;
      CHECK(found);
      CHECK(seen.insert(c(i, 0)).second);  // distinct rows
    }
  }
  SUBCASE("N = 1 returns a training point") {
    const Eigen::MatrixXd c = subsample_centers(ds, 1, 7);
    CHECK(c.rows() == 1);
  }
  SUBCASE("N > n throws") { CHECK_THROWS_AS(subsample_centers(ds, 21, 5), std::domain_error); }
}

TEST_CASE("unknown dataset name rejected") {
  CHECK_THROWS(dataset_from_string("nope"));
  CHECK(dataset_from_string("swissroll6d") == DatasetName::swissroll6d);
  CHECK(dataset_to_string(DatasetName::spiral) == "spiral");
}
