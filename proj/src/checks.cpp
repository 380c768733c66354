#include "kscore/checks.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "kscore/core_math.hpp"
#include "kscore/lifted.hpp"
#include "kscore/rng.hpp"
#include "kscore/training.hpp"

namespace kscore {

KernelModel random_model(int d, int n_centers, std::uint64_t seed, double beta,
                         double horizon) {
  Rng center_rng = Rng(seed).split(streams::kCenters);
  Eigen::MatrixXd centers(n_centers, d);
  for (int i = 0; i < n_centers; ++i)
    centers.row(i) = center_rng.normal_vec(d).transpose();
  Rng param_rng = Rng(seed).split(streams::kInit);
  const int nl = packed_size(d);
  Eigen::VectorXd raw(n_centers * nl);
  for (int i = 0; i < n_centers; ++i) {
    for (int r = 0; r < d; ++r)
      for (int c = 0; c <= r; ++c)
        raw[i * nl + packed_index(r, c)] =
            (r == c) ? param_rng.uniform(-0.5, 1.5) : 0.3 * param_rng.normal();
  }
  auto provider = std::make_shared<TableProvider>(centers, raw);
  return KernelModel(centers, provider, beta, horizon);
}

KernelModel::Evolved corrupted_evolved(const KernelModel& model, double s) {
  KernelModel::Evolved ev;
  ev.s = s;
  const int N = model.num_centers();
  const int d = model.dim();
  const double shrink = 1.0 / (1.0 + s);
  ev.root.resize(N);
  ev.log_det.resize(N);
  ev.trace.resize(N);
  for (int i = 0; i < N; ++i) {
    ev.root[i] = std::sqrt(shrink) * model.chol(i);
    ev.log_det[i] = model.log_det(i) + d * std::log(shrink);
    ev.trace[i] = shrink * model.precision(i).trace();
  }
  return ev;
}

double hjb_residual_of_family(
    const KernelModel& model,
    const std::function<KernelModel::Evolved(double)>& family,
    const Eigen::VectorXd& x, double t, double fd_step) {
  const double horizon = model.horizon();
  const double b2 = model.beta() * model.beta();
  const auto potential = [&](double tt) {
    return -b2 * model.log_density(family(horizon - tt), x);
  };
  const double du_dt = (potential(t + fd_step) - potential(t - fd_step)) / (2.0 * fd_step);
  const KernelModel::Evolved ev = family(horizon - t);
  const Eigen::VectorXd sc = model.score(ev, x);
  const double lap = model.laplacian_ratio(ev, x);
  const double grad_u_sq = b2 * b2 * sc.squaredNorm();
  const double lap_u = -b2 * (lap - sc.squaredNorm());
  return -du_dt + 0.5 * grad_u_sq - 0.5 * b2 * lap_u;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

CheckResult check_hjb(std::uint64_t seed) {
  const struct {
    int d;
    int n;
    double beta;
  } configs[] = {{1, 4, 1.0}, {2, 6, 0.5}, {3, 8, 2.0}};
  const double h = 1e-4;
  double worst = 0.0;
  double worst_corrupted = std::numeric_limits<double>::infinity();
  double ratio_lo = std::numeric_limits<double>::infinity();
  double ratio_hi = 0.0;
  for (std::uint64_t c = 0; c < 3; ++c) {
    const auto& cfg = configs[c];
    const KernelModel model = random_model(cfg.d, cfg.n, seed + c, cfg.beta);
    const auto corrupted = [&](double s) { return corrupted_evolved(model, s); };
    Rng rng = Rng(seed + 100 + c).split(streams::kSampling);
    double max_corr = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd x = 1.5 * rng.normal_vec(cfg.d);
      const double t = rng.uniform(2.0 * h, model.horizon() - 2.0 * h);
      const double r = model.hjb_residual(x, t, h);
      const double du_dt = (model.potential(x, t + h) - model.potential(x, t - h)) / (2 * h);
      worst = std::max(worst, std::abs(r) / (1.0 + std::abs(du_dt)));
      if (k < 20) {
        const double r2 = model.hjb_residual(x, t, h / 2.0);
        if (std::abs(r) > 1e-9) {  // above the fp rounding floor of the FD
          const double ratio = std::abs(r) / std::max(std::abs(r2), 1e-300);
          ratio_lo = std::min(ratio_lo, ratio);
          ratio_hi = std::max(ratio_hi, ratio);
        }
        max_corr = std::max(
            max_corr, std::abs(hjb_residual_of_family(model, corrupted, x, t, h)));
      }
    }
    worst_corrupted = std::min(worst_corrupted, max_corr);
  }
  CheckResult res;
  res.name = "hjb";
  const bool order_ok = ratio_hi <= 8.0 && ratio_lo >= 2.0;
  res.passed = worst < 1e-4 && worst_corrupted > 1e-2 && order_ok;
  res.detail = "max normalized residual " + fmt(worst) + " (< 1e-4), corrupted control " +
               fmt(worst_corrupted) + " (> 1e-2), halving ratio in [" + fmt(ratio_lo) +
               ", " + fmt(ratio_hi) + "] (~4)";
  return res;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (int i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) /
                                std::max(1e-6, std::abs(want[i])));
  return worst;
}

CheckResult check_gradcheck(std::uint64_t seed) {
  double worst = 0.0;
  // gelu derivative
  {
    Rng rng = Rng(seed).split(streams::kInit);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform(-4.0, 4.0);
      const double fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - gelu_derivative(x)));
    }
  }
  double worst_rel = 0.0;
  const auto fd_check = [&](std::shared_ptr<PrecisionProvider> provider,
                            const Eigen::MatrixXd& centers,
                            const Eigen::MatrixXd& batch) {
    Tape tape;
    std::vector<int> leaves;
    const int dec = provider->tape_decode(tape, centers, leaves);
    const int loss = tape.ism_terminal_loss(dec, centers, batch);
    tape.backward(loss);
    const Eigen::VectorXd grad = provider->gather_grad(tape, leaves);
    const Eigen::VectorXd base = provider->params();
    Eigen::VectorXd fd(grad.size());
    const double h = 1e-5;
    for (int p = 0; p < base.size(); ++p) {
      Eigen::VectorXd pp = base;
      pp[p] += h;
      provider->set_params(pp);
      Tape t1;
      std::vector<int> l1;
      const double up = t1.scalar_value(
          t1.ism_terminal_loss(provider->tape_decode(t1, centers, l1), centers, batch));
      pp[p] -= 2.0 * h;
      provider->set_params(pp);
      Tape t2;
      std::vector<int> l2;
      const double dn = t2.scalar_value(
          t2.ism_terminal_loss(provider->tape_decode(t2, centers, l2), centers, batch));
      fd[p] = (up - dn) / (2.0 * h);
    }
    provider->set_params(base);
    worst_rel = std::max(worst_rel, rel_err(grad, fd));
  };

  const KernelModel table_model = random_model(2, 3, seed + 1);
  Rng batch_rng = Rng(seed + 2).split(streams::kBatches);
  Eigen::MatrixXd batch(8, 2);
  for (int b = 0; b < 8; ++b) batch.row(b) = batch_rng.normal_vec(2).transpose();
  fd_check(table_model.provider_ptr()->clone(), table_model.centers(), batch);

  auto mlp_provider = std::make_shared<MlpProvider>(
      MlpProvider::initialized(2, seed + 3, /*hidden_width=*/8, /*hidden_layers=*/2));
  fd_check(mlp_provider, table_model.centers(), batch);

  CheckResult res;
  res.name = "gradcheck";
  res.passed = worst < 1e-8 && worst_rel < 1e-4;
  res.detail = "gelu FD gap " + fmt(worst) + " (< 1e-8), ism tape vs FD rel err " +
               fmt(worst_rel) + " (< 1e-4)";
  return res;
}

CheckResult check_equiv(std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int d = 1 + k % 3;
    const KernelModel model = random_model(d, 3 + k % 5, seed + k);
    const LiftedForm form = assemble(model);
    Rng rng = Rng(seed + 50 + k).split(streams::kSampling);
    for (int j = 0; j < 100; ++j) {
      const Eigen::VectorXd x = 2.0 * rng.normal_vec(d);
      const Eigen::VectorXd a = lifted_score(form, x);
      const Eigen::VectorXd b = model.score(x, NoiseTime{0.0});
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  CheckResult res;
  res.name = "equiv";
  res.passed = worst < 1e-10;
  res.detail = "lifted vs kernel score max abs diff " + fmt(worst) + " (< 1e-10)";
  return res;
}

CheckResult check_heat(std::uint64_t seed) {
  const KernelModel model = random_model(1, 4, seed);
  const double beta = model.beta();
  const KernelModel::Evolved ev0 = model.evolved(NoiseTime{0.0});
  double worst = 0.0;
  for (const double s : {0.1, 0.5, 1.0}) {
    const KernelModel::Evolved evs = model.evolved(NoiseTime{s});
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd x(1);
      x[0] = -3.0 + 6.0 * k / 49.0;
      const double direct = std::exp(model.log_density(evs, x));
      const double quad = trapezoid(
          [&](double yv) {
            Eigen::VectorXd y(1);
            y[0] = yv;
            return heat_kernel(beta * beta / 2.0, s, x, y) *
                   std::exp(model.log_density(ev0, y));
          },
          -15.0, 15.0, 6000);
      worst = std::max(worst, std::abs(direct - quad));
    }
  }
  CheckResult res;
  res.name = "heat";
  res.passed = worst < 1e-6;
  res.detail = "heat-closure max abs gap " + fmt(worst) + " (< 1e-6)";
  return res;
}

}  // namespace

std::vector<CheckResult> run_check_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  if (all || suite == "hjb") out.push_back(check_hjb(seed));
  if (all || suite == "gradcheck") out.push_back(check_gradcheck(seed));
  if (all || suite == "equiv") out.push_back(check_equiv(seed));
  if (all || suite == "heat") out.push_back(check_heat(seed));
  if (out.empty()) throw std::invalid_argument("unknown check suite: " + suite);
  return out;
}

}  // namespace kscore
