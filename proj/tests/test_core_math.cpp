#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "kscore/core_math.hpp"
#include "kscore/rng.hpp"
#include "test_util.hpp"

using namespace kscore;

TEST_CASE("heat_kernel") {
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  SUBCASE("closed-form value at the diagonal") {
    // gamma=0.5, t=1, d=1: (4 pi * 0.5)^(-1/2) = (2 pi)^(-1/2)
    CHECK(heat_kernel(0.5, 1.0, zero1, zero1) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  }
  SUBCASE("symmetry in the two arguments") {
    Rng rng(1);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd a = rng.normal_vec(3), b = rng.normal_vec(3);
      CHECK(heat_kernel(0.8, 0.4, a, b) == heat_kernel(0.8, 0.4, b, a));
    }
  }
  SUBCASE("integrates to one (d=1 quadrature)") {
    Eigen::VectorXd x(1);
    x[0] = 0.3;
    const double mass = trapezoid(
        [&](double y) {
          Eigen::VectorXd yv(1);
          yv[0] = y;
          return heat_kernel(0.5, 0.3, x, yv);
        },
        -10.0, 10.0, 10000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("integrates to one (d=2 quadrature)") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    double mass = 0.0;
    const int n = 300;
    const double lo = -8, hi = 8, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        Eigen::VectorXd y(2);
        y << lo + i * h, lo + j * h;
        const double w = ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
        mass += w * heat_kernel(0.7, 0.5, x, y);
      }
    CHECK(mass * h * h == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("semigroup property via quadrature (d=1)") {
    Eigen::VectorXd x(1), y(1);
    x[0] = -0.4;
    y[0] = 0.9;
    const double gamma = 0.5, t = 0.3, s = 0.45;
    const double conv = trapezoid(
        [&](double z) {
          Eigen::VectorXd zv(1);
          zv[0] = z;
          return heat_kernel(gamma, t, x, zv) * heat_kernel(gamma, s, zv, y);
        },
        -12.0, 12.0, 12000);
    CHECK(conv == doctest::Approx(heat_kernel(gamma, t + s, x, y)).epsilon(1e-5));
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(heat_kernel(0.0, 1.0, zero1, zero1), std::domain_error);
    CHECK_THROWS_AS(heat_kernel(1.0, -1.0, zero1, zero1), std::domain_error);
  }
}

TEST_CASE("log_sum_exp") {
  SUBCASE("[0,0] -> ln 2") {
    Eigen::VectorXd v(2);
    v << 0.0, 0.0;
    CHECK(log_sum_exp(v) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("shift identity survives huge entries") {
    Eigen::VectorXd v(2);
    v << 1000.0, 1000.0;
    CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("single element") {
    Eigen::VectorXd v(1);
    v << -3.7;
    CHECK(log_sum_exp(v) == -3.7);
  }
  SUBCASE("all -inf stays -inf") {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(3, -std::numeric_limits<double>::infinity());
    CHECK(log_sum_exp(v) == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("translation invariance property") {
    Rng rng(4);
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd v = rng.normal_vec(6) * 10.0;
      const double c = rng.uniform(-50.0, 50.0);
      CHECK(log_sum_exp((v.array() + c).matrix()) ==
            doctest::Approx(log_sum_exp(v) + c).epsilon(1e-13));
    }
  }
  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(log_sum_exp(Eigen::VectorXd(0)), std::domain_error);
  }
}

TEST_CASE("cholesky_to_precision") {
  SUBCASE("identity factor") {
    Eigen::VectorXd packed(3);
    packed << 1.0, 0.0, 1.0;
    CHECK((cholesky_to_precision(packed, 2) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("hand-computed 2x2") {
    Eigen::VectorXd packed(3);
    packed << 2.0, 1.0, 1.0;  // L = [[2,0],[1,1]]
    const Eigen::MatrixXd g = cholesky_to_precision(packed, 2);
    Eigen::MatrixXd want(2, 2);
    want << 4.0, 2.0, 2.0, 2.0;
    CHECK((g - want).norm() == 0.0);
    CHECK(packed_log_det(packed, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  }
  SUBCASE("log det via diagonal equals eigenvalue route") {
    Rng rng(10);
    for (int k = 0; k < 15; ++k) {
      const int d = 1 + static_cast<int>(rng.uniform_below(4));
      Eigen::VectorXd packed(packed_size(d));
      for (int r = 0; r < d; ++r)
        for (int c = 0; c <= r; ++c)
          packed[packed_index(r, c)] = (r == c) ? rng.uniform(0.2, 3.0) : rng.normal();
      const Eigen::MatrixXd g = cholesky_to_precision(packed, d);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
      CHECK(packed_log_det(packed, d) ==
            doctest::Approx(eig.eigenvalues().array().log().sum()).epsilon(1e-10));
      // re-factorizing recovers the packed factor
      const Eigen::MatrixXd l2 = spd_cholesky(g);
      CHECK((pack_lower(l2) - packed).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("nonpositive diagonal throws") {
    Eigen::VectorXd packed(3);
    packed << 1.0, 0.5, -0.2;
    CHECK_THROWS_AS(cholesky_to_precision(packed, 2), std::domain_error);
  }
}

TEST_CASE("spd_inverse and spd_solve") {
  SUBCASE("identity and diagonal") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    CHECK((spd_inverse(eye) - eye).norm() == 0.0);
    Eigen::MatrixXd diag = Eigen::Vector2d(2.0, 4.0).asDiagonal();
    const Eigen::MatrixXd inv = spd_inverse(diag);
    CHECK(inv(0, 0) == doctest::Approx(0.5));
    CHECK(inv(1, 1) == doctest::Approx(0.25));
  }
  SUBCASE("residual check on random SPD") {
    Rng rng(77);
    for (int k = 0; k < 10; ++k) {
      const int d = 2 + static_cast<int>(rng.uniform_below(4));
      const Eigen::MatrixXd g = test_util::random_spd(d, rng);
      const Eigen::MatrixXd prod = g * spd_inverse(g);
      CHECK((prod - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
      const Eigen::VectorXd v = rng.normal_vec(d);
      CHECK((g * spd_solve(g, v) - v).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("non-SPD input throws") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(spd_inverse(bad), std::domain_error);
    CHECK_THROWS_AS(spd_solve(bad, Eigen::Vector2d(1, 1)), std::domain_error);
  }
}

TEST_CASE("packed index helpers round-trip") {
  Rng rng(3);
  for (int d = 1; d <= 5; ++d) {
    Eigen::VectorXd packed(packed_size(d));
    for (int i = 0; i < packed.size(); ++i) packed[i] = rng.normal();
    CHECK((pack_lower(unpack_lower(packed, d)) - packed).norm() == 0.0);
    for (int r = 0; r < d; ++r) CHECK(packed_diag_index(r) == packed_index(r, r));
  }
}
