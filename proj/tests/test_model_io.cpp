#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "kscore/checks.hpp"
#include "kscore/csv.hpp"
#include "kscore/model_io.hpp"
#include "kscore/rng.hpp"
#include "test_util.hpp"

using namespace kscore;

namespace {
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/kscore_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("format_g17 round-trips doubles exactly") {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::exp(rng.uniform(-300.0, 300.0)) * (rng.uniform() - 0.5);
    CHECK(std::strtod(format_g17(v).c_str(), nullptr) == v);
  }
  CHECK(std::strtod(format_g17(0.1).c_str(), nullptr) == 0.1);
}

TEST_CASE("kernel model json round-trip is value-exact") {
  SUBCASE("table provider") {
    const KernelModel m = random_model(2, 5, 77, 1.3, 0.8);
    TempFile f("table_model.json");
    save_model(m, f.path);
    const KernelModel loaded = load_model(f.path);
    CHECK(loaded.beta() == m.beta());
    CHECK(loaded.horizon() == m.horizon());
    CHECK((loaded.centers() - m.centers()).norm() == 0.0);
    CHECK((loaded.provider().params() - m.provider().params()).norm() == 0.0);
    CHECK(loaded.provider().kind() == "table");
    CHECK(model_file_kind(f.path) == "kernel");
    // behavior identical
    Rng rng(4);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd x = rng.normal_vec(2);
      CHECK(loaded.log_density(x, NoiseTime{0.3}) == m.log_density(x, NoiseTime{0.3}));
    }
  }
  SUBCASE("mlp provider") {
    auto provider = std::make_shared<MlpProvider>(MlpProvider::initialized(2, 3, 8, 2));
    Eigen::MatrixXd centers(3, 2);
    centers << 0, 0, 1, -1, 0.5, 0.25;
    const KernelModel m(centers, provider, 1.0, 1.0);
    TempFile f("mlp_model.json");
    save_model(m, f.path);
    const KernelModel loaded = load_model(f.path);
    CHECK(loaded.provider().kind() == "mlp");
    CHECK((loaded.provider().params() - provider->params()).norm() == 0.0);
  }
}

TEST_CASE("dsm net json round-trip") {
  const DsmScoreNet net = DsmScoreNet::initialized(2, 9, 1.2, 0.9, 8, 2);
  TempFile f("dsm.json");
  save_dsm_net(net, f.path);
  CHECK(model_file_kind(f.path) == "dsm_net");
  const DsmScoreNet loaded = load_dsm_net(f.path);
  CHECK(loaded.beta() == net.beta());
  CHECK(loaded.horizon() == net.horizon());
  CHECK((loaded.mlp().params - net.mlp().params).norm() == 0.0);
  CHECK_THROWS(load_model(f.path));
}

TEST_CASE("csv round-trip") {
  Rng rng(10);
  Eigen::MatrixXd m(7, 3);
  for (int r = 0; r < 7; ++r) m.row(r) = rng.normal_vec(3).transpose();
  m(0, 0) = 1e-300;
  m(1, 1) = -3.0e120;
  SUBCASE("no header") {
    TempFile f("plain.csv");
    write_csv(f.path, m);
    CHECK((read_csv(f.path) - m).norm() == 0.0);
  }
  SUBCASE("default header is skipped on read") {
    TempFile f("header.csv");
    write_csv(f.path, m, true);
    CHECK((read_csv(f.path) - m).norm() == 0.0);
  }
  SUBCASE("empty matrix") {
    TempFile f("empty.csv");
    write_csv(f.path, Eigen::MatrixXd(0, 2));
    CHECK(read_csv(f.path).rows() == 0);
  }
}
