#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kscore/checks.hpp"
#include "kscore/datasets.hpp"
#include "kscore/metrics.hpp"
#include "kscore/samplers.hpp"
#include "kscore/training.hpp"
#include "test_util.hpp"

using namespace kscore;

TEST_CASE("nll") {
  SUBCASE("standard Gaussian model on its own distribution gives the entropy") {
    const KernelModel m = test_util::standard_gaussian_model(2);
    DatasetSpec spec;
    spec.name = DatasetName::gmm_ground_truth;
    spec.n = 100000;
    spec.seed = 21;
    const Dataset ds = generate(spec);
    CHECK(nll(m, ds.points) == doctest::Approx(1.0 + kLogTwoPi).epsilon(0.01));
  }
  SUBCASE("tiny covariance far from held-out points explodes the NLL") {
    Eigen::MatrixXd centers(1, 2);
    centers << 10.0, 10.0;
    Eigen::VectorXd raw(3);
    raw << softplus_inverse(30.0), 0.0, softplus_inverse(30.0);
    auto provider = std::make_shared<TableProvider>(centers, raw);
    const KernelModel m(centers, provider, 1.0, 1.0);
    Eigen::MatrixXd held = Eigen::MatrixXd::Zero(4, 2);
    CHECK(nll(m, held) > 1e4);
  }
  SUBCASE("NLL on own samples approximates the mixture entropy (d=1 quadrature)") {
    const KernelModel m = random_model(1, 3, 2211);
    Rng rng = Rng(1).split(streams::kSampling);
    const Eigen::MatrixXd own = sample_direct(m, 200000, rng);
    const double mc = nll(m, own);
    const KernelModel::Evolved ev = m.evolved(NoiseTime{0.0});
    const double quad = trapezoid(
        [&](double x) {
          Eigen::VectorXd xv(1);
          xv[0] = x;
          const double ld = m.log_density(ev, xv);
          return -ld * std::exp(ld);
        },
        -18.0, 18.0, 40000);
    CHECK(mc == doctest::Approx(quad).epsilon(0.01));
    CHECK_THROWS_AS(nll(m, Eigen::MatrixXd(0, 1)), std::domain_error);
  }
}

TEST_CASE("mmd2_unbiased") {
  SUBCASE("identical degenerate points give exactly 0") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 1);
    CHECK(mmd2_unbiased(x, y, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("far apart clusters approach 2") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(2, 1, 100.0);
    CHECK(mmd2_unbiased(x, y, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("null scale for same-distribution draws") {
    Rng rng(12);
    const int n = 3000;
    Eigen::MatrixXd x(n, 2), y(n, 2);
    for (int i = 0; i < n; ++i) {
      x.row(i) = rng.normal_vec(2).transpose();
      y.row(i) = rng.normal_vec(2).transpose();
    }
    const double v = mmd2_unbiased_median(x, y, 5);
    CHECK(std::abs(v) < 5.0 / n);
  }
  SUBCASE("symmetry in the two samples") {
    Rng rng(13);
    Eigen::MatrixXd x(40, 2), y(50, 2);
    for (int i = 0; i < 40; ++i) x.row(i) = rng.normal_vec(2).transpose();
    for (int i = 0; i < 50; ++i) y.row(i) = (rng.normal_vec(2).array() + 0.5).matrix();
    CHECK(mmd2_unbiased(x, y, 0.7) == doctest::Approx(mmd2_unbiased(y, x, 0.7)).epsilon(1e-12));
  }
  SUBCASE("median bandwidth is deterministic given the seed") {
    Rng rng(14);
    Eigen::MatrixXd x(3000, 2), y(500, 2);
    for (int i = 0; i < 3000; ++i) x.row(i) = rng.normal_vec(2).transpose();
    for (int i = 0; i < 500; ++i) y.row(i) = rng.normal_vec(2).transpose();
    CHECK(median_heuristic_bandwidth(x, y, 9) == median_heuristic_bandwidth(x, y, 9));
    CHECK(median_heuristic_bandwidth(x, y, 9) > 0.0);
  }
  SUBCASE("size guards") {
    Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 2);
    Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(mmd2_unbiased(one, two, 1.0), std::domain_error);
  }
}

TEST_CASE("nn_distance_stats") {
  SUBCASE("samples equal to the reference have zero median") {
    Rng rng(15);
    Eigen::MatrixXd x(30, 2);
    for (int i = 0; i < 30; ++i) x.row(i) = rng.normal_vec(2).transpose();
    CHECK(nn_distance_stats(x, x).median == 0.0);
  }
  SUBCASE("3-4-5 triangle") {
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(1, 2);
    Eigen::MatrixXd sample(1, 2);
    sample << 3.0, 4.0;
    CHECK(nn_distance_stats(sample, ref).median == doctest::Approx(5.0));
  }
  SUBCASE("exhaustive scan equals a brute-force re-computation") {
    Rng rng(16);
    Eigen::MatrixXd samples(25, 3), ref(40, 3);
    for (int i = 0; i < 25; ++i) samples.row(i) = rng.normal_vec(3).transpose();
    for (int i = 0; i < 40; ++i) ref.row(i) = rng.normal_vec(3).transpose();
    const NnStats stats = nn_distance_stats(samples, ref);
    for (int i = 0; i < 25; ++i) {
      double best = 1e300;
      for (int j = 0; j < 40; ++j)
        best = std::min(best, (samples.row(i) - ref.row(j)).norm());
      CHECK(stats.distances[i] == doctest::Approx(best).epsilon(1e-12));
    }
    CHECK(stats.q25 <= stats.median);
    CHECK(stats.median <= stats.q75);
  }
}

TEST_CASE("ellipses") {
  SUBCASE("diagonal precision aligns with the axes") {
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(1, 2);
    Eigen::VectorXd raw(3);
    raw << softplus_inverse(2.0 - kDiagFloor), 0.0, softplus_inverse(1.0 - kDiagFloor);
    auto provider = std::make_shared<TableProvider>(centers, raw);
    const KernelModel m(centers, provider, 1.0, 1.0);  // Gamma = diag(4, 1)
    const auto es = ellipses(m, 1, 0);
    REQUIRE(es.size() == 1);
    // covariance eigenvalues ascending: 0.25, 1
    CHECK(es[0].eigvals[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(es[0].eigvals[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(es[0].eigvecs(1, 0)) < 1e-9);  // first axis is x
  }
  SUBCASE("reconstruction and positivity on random models") {
    const KernelModel m = random_model(2, 8, 99);
    const auto es = ellipses(m, 5, 3);
    CHECK(es.size() == 5);
    for (const auto& e : es) {
      CHECK(e.eigvals.minCoeff() > 0.0);
      const Eigen::MatrixXd recon =
          e.eigvecs * e.eigvals.asDiagonal() * e.eigvecs.transpose();
      // find the matching center to compare against Gamma^-1
      bool matched = false;
      for (int i = 0; i < m.num_centers(); ++i) {
        if ((m.centers().row(i).transpose() - e.center).norm() == 0.0) {
          CHECK((recon - m.covariance(i)).cwiseAbs().maxCoeff() < 1e-10);
          const double det_prod = e.eigvals.prod();
          CHECK(det_prod ==
                doctest::Approx(std::exp(-m.log_det(i))).epsilon(1e-9));
          matched = true;
        }
      }
      CHECK(matched);
    }
    CHECK_THROWS_AS(ellipses(m, 9, 0), std::domain_error);
  }
  SUBCASE("seeded determinism") {
    const KernelModel m = random_model(2, 6, 42);
    const auto a = ellipses(m, 3, 5), b = ellipses(m, 3, 5);
    for (int i = 0; i < 3; ++i) CHECK((a[i].center - b[i].center).norm() == 0.0);
  }
}
