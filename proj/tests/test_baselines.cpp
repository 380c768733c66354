#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kscore/baselines.hpp"
#include "kscore/core_math.hpp"
#include "kscore/datasets.hpp"
#include "test_util.hpp"

using namespace kscore;

TEST_CASE("empirical_score") {
  SUBCASE("single training point: -(x - Z)/(beta^2 s)") {
    Eigen::MatrixXd z(1, 2);
    z << 0.5, -1.0;
    const EmpiricalScore es{z, 1.4, 1.0};
    Eigen::VectorXd x(2);
    x << 2.0, 0.3;
    const double s = 0.37;
    const Eigen::VectorXd got = empirical_score(es, x, NoiseTime{s});
    const Eigen::VectorXd want = -(x - z.row(0).transpose()) / (1.4 * 1.4 * s);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("matches the isotropic kernel model score (bridge identity)") {
    Rng rng(404);
    Eigen::MatrixXd pts(25, 2);
    for (int i = 0; i < 25; ++i) pts.row(i) = rng.normal_vec(2).transpose();
    const double beta = 0.9;
    for (const double s : {0.05, 0.2, 0.6}) {
      const EmpiricalScore es{pts, beta, 1.0};
      auto provider =
          std::make_shared<TableProvider>(TableProvider::initialized(pts, beta, s));
      const KernelModel iso(pts, provider, beta, 1.0);
      const KernelModel::Evolved ev0 = iso.evolved(NoiseTime{0.0});
      for (int k = 0; k < 40; ++k) {
        const Eigen::VectorXd x = 2.0 * rng.normal_vec(2);
        const Eigen::VectorXd a = empirical_score(es, x, NoiseTime{s});
        const Eigen::VectorXd b = iso.score(ev0, x);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
  SUBCASE("norm bounded by the farthest attraction") {
    Rng rng(7);
    Eigen::MatrixXd pts(10, 2);
    for (int i = 0; i < 10; ++i) pts.row(i) = rng.normal_vec(2).transpose();
    const EmpiricalScore es{pts, 1.0, 1.0};
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd x = 3.0 * rng.normal_vec(2);
      const double s = rng.uniform(0.01, 1.0);
      double far = 0.0;
      for (int i = 0; i < 10; ++i)
        far = std::max(far, (x - pts.row(i).transpose()).norm());
      CHECK(empirical_score(es, x, NoiseTime{s}).norm() <= far / (s) + 1e-12);
    }
  }
  SUBCASE("s -> 0 concentrates the weight on the nearest point") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    const EmpiricalScore es{pts, 1.0, 1.0};
    Eigen::VectorXd x(1);
    x << 0.3;  // nearer to 0
    const Eigen::VectorXd sc = empirical_score(es, x, NoiseTime{1e-4});
    // pull toward 0: score ~ -(x-0)/s
    CHECK(sc[0] == doctest::Approx(-0.3 / 1e-4).epsilon(1e-6));
  }
  SUBCASE("terminal singularity guarded") {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(1, 1);
    const EmpiricalScore es{pts, 1.0, 1.0};
    CHECK_THROWS_AS(empirical_score(es, Eigen::VectorXd::Zero(1), NoiseTime{0.0}),
                    std::domain_error);
  }
}

TEST_CASE("dsm score net shapes and evaluation") {
  const DsmScoreNet net = DsmScoreNet::initialized(2, 3, 1.0, 1.0, 16, 2);
  CHECK(net.dim() == 2);
  CHECK(net.mlp().widths.front() == 3);
  CHECK(net.mlp().widths.back() == 2);
  Eigen::MatrixXd pts(4, 2);
  Rng rng(5);
  for (int i = 0; i < 4; ++i) pts.row(i) = rng.normal_vec(2).transpose();
  const Eigen::MatrixXd batch_out = net.evaluate_all(pts, NoiseTime{0.4});
  for (int i = 0; i < 4; ++i) {
    const Eigen::VectorXd one = net.evaluate(pts.row(i).transpose(), NoiseTime{0.4});
    CHECK((batch_out.row(i).transpose() - one).norm() < 1e-14);
  }
}

TEST_CASE("dsm_loss values") {
  SUBCASE("zero net gives E|xi|^2 = d") {
    DsmScoreNet net = DsmScoreNet::initialized(2, 3, 1.0, 1.0, 8, 2);
    net.mlp().params.setZero();
    Rng data_rng(1);
    const int B = 20000;
    Eigen::MatrixXd y0(B, 2);
    Eigen::VectorXd s(B);
    for (int b = 0; b < B; ++b) {
      y0.row(b) = data_rng.normal_vec(2).transpose();
      s[b] = data_rng.uniform(1e-3, 1.0);
    }
    Rng noise_rng(2);
    CHECK(dsm_loss(net, y0, s, noise_rng) == doctest::Approx(2.0).epsilon(0.03));
  }
  SUBCASE("exact conditional score for point data gives exactly zero loss") {
    // for Y0 = 0 the optimal field is -y/(beta^2 s); in residual form that is
    // out_b = -xi_b / scale_b, which cancels the noise term identically
    Rng rng(8);
    const int B = 16;
    Eigen::MatrixXd xi(B, 2), out(B, 2);
    Eigen::VectorXd scale(B);
    for (int b = 0; b < B; ++b) {
      xi.row(b) = rng.normal_vec(2).transpose();
      scale[b] = rng.uniform(0.1, 1.0);
      out.row(b) = -xi.row(b) / scale[b];
    }
    Tape tape;
    const int node = tape.constant(out);
    // zero up to the rounding of scale * (xi / scale)
    CHECK(tape.scalar_value(tape.scaled_residual_loss(node, xi, scale)) < 1e-30);
  }
  SUBCASE("gradient of the dsm tape path matches FD") {
    DsmScoreNet net = DsmScoreNet::initialized(1, 9, 1.0, 1.0, 6, 2);
    Rng rng(3);
    const int B = 8;
    Eigen::MatrixXd input(B, 2), xi(B, 1);
    Eigen::VectorXd scale(B);
    for (int b = 0; b < B; ++b) {
      input(b, 0) = rng.normal();
      input(b, 1) = rng.uniform(0.0, 1.0);
      xi(b, 0) = rng.normal();
      scale[b] = rng.uniform(0.1, 1.0);
    }
    Tape tape;
    std::vector<int> leaves;
    const int out = net.mlp().tape_forward(tape, tape.constant(input), leaves);
    const int loss = tape.scaled_residual_loss(out, xi, scale);
    tape.backward(loss);
    const Eigen::VectorXd grad = net.mlp().gather_grad(tape, leaves);
    const double h = 1e-6;
    const auto loss_at = [&](const Eigen::VectorXd& params) {
      Mlp m = net.mlp();
      m.params = params;
      const Eigen::MatrixXd o = m.forward(input);
      double acc = 0.0;
      for (int b = 0; b < B; ++b)
        acc += (scale[b] * o.row(b) + xi.row(b)).squaredNorm();
      return acc / B;
    };
    for (int p = 0; p < net.mlp().n_params(); ++p) {
      Eigen::VectorXd up = net.mlp().params, dn = net.mlp().params;
      up[p] += h;
      dn[p] -= h;
      const double fd = (loss_at(up) - loss_at(dn)) / (2 * h);
      CHECK(grad[p] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("train_dsm") {
  DatasetSpec spec;
  spec.name = DatasetName::two_moons;
  spec.n = 2000;
  spec.noise = 0.05;
  spec.seed = 1;
  const Dataset ds = generate(spec);
  SUBCASE("steps=0 returns the freshly initialized net") {
    DsmTrainConfig cfg;
    cfg.steps = 0;
    cfg.seed = 5;
    const DsmScoreNet net = train_dsm(ds, cfg);
    const DsmScoreNet init = DsmScoreNet::initialized(2, 5, cfg.beta, cfg.horizon);
    CHECK((net.mlp().params - init.mlp().params).norm() == 0.0);
  }
  SUBCASE("deterministic per seed and loss decreases") {
    DsmTrainConfig cfg;
    cfg.steps = 200;
    cfg.seed = 5;
    const DsmScoreNet a = train_dsm(ds, cfg);
    const DsmScoreNet b = train_dsm(ds, cfg);
    CHECK((a.mlp().params - b.mlp().params).norm() == 0.0);

    // loss at init vs after training, on a fixed probe batch
    Rng probe(77);
    const int B = 4000;
    Eigen::MatrixXd y0(B, 2);
    Eigen::VectorXd s(B);
    for (int k = 0; k < B; ++k) {
      y0.row(k) = ds.points.row(static_cast<int>(probe.uniform_below(ds.n())));
      s[k] = probe.uniform(1e-3, 1.0);
    }
    Rng noise1(123), noise2(123);
    const DsmScoreNet init = DsmScoreNet::initialized(2, 5, cfg.beta, cfg.horizon);
    const double before = dsm_loss(init, y0, s, noise1);
    const double after = dsm_loss(a, y0, s, noise2);
    CHECK(after < before);
  }
}
