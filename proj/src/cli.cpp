#include "kscore/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kscore/checks.hpp"
#include "kscore/csv.hpp"
#include "kscore/datasets.hpp"
#include "kscore/metrics.hpp"
#include "kscore/model_io.hpp"
#include "kscore/samplers.hpp"
#include "kscore/training.hpp"

namespace kscore {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!cell.empty()) out.push_back(cell);
  return out;
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& x) {
  return x.colwise().mean().transpose();
}

Eigen::MatrixXd column_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const int denom = std::max<int>(1, static_cast<int>(x.rows()) - 1);
  return centered.transpose() * centered / denom;
}

// ---- datagen ---------------------------------------------------------------

struct DatagenOpts {
  std::string dataset;
  int n = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  bool header = false;
  int gmm_dim = 2;
};

int cmd_datagen(const DatagenOpts& o) {
  DatasetSpec spec;
  spec.name = dataset_from_string(o.dataset);
  spec.n = o.n;
  spec.noise = o.noise;
  spec.seed = o.seed;
  spec.gmm_dim = o.gmm_dim;
  const Dataset ds = generate(spec);
  write_csv(o.out, ds.points, o.header);
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainOpts {
  std::string data;
  int centers = 0;
  std::string provider = "mlp";
  std::int64_t steps = 1000;
  int batch = 64;
  double lr = 1e-3;
  double beta = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
  std::string optimizer = "adam";
  std::int64_t eval_every = 0;
  double heldout_fraction = 0.1;
};

int cmd_train(const TrainOpts& o) {
  const Eigen::MatrixXd all = read_csv(o.data);
  if (all.rows() < 1) throw UsageError("train: empty --data file");
  Dataset full{all, DatasetSpec{}};

  Dataset train_ds = full;
  Eigen::MatrixXd heldout;
  if (o.heldout_fraction > 0.0) {
    auto [tr, held] = split(full, 1.0 - o.heldout_fraction, o.seed);
    train_ds = std::move(tr);
    heldout = held.points;
  }
  if (o.centers < 1 || o.centers > train_ds.n())
    throw UsageError("train: --centers must lie in [1, training rows]");
  const Eigen::MatrixXd centers = subsample_centers(train_ds, o.centers, o.seed);

  std::shared_ptr<PrecisionProvider> provider;
  if (o.provider == "table")
    provider = std::make_shared<TableProvider>(TableProvider::initialized(centers, o.beta));
  else if (o.provider == "mlp")
    provider = std::make_shared<MlpProvider>(
        MlpProvider::initialized(static_cast<int>(centers.cols()), o.seed));
  else
    throw UsageError("train: --provider must be table or mlp");

  TrainConfig cfg;
  cfg.steps = o.steps;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.beta = o.beta;
  cfg.horizon = o.horizon;
  cfg.seed = o.seed;
  cfg.optimizer = o.optimizer == "sgd" ? TrainConfig::Optimizer::sgd
                                       : TrainConfig::Optimizer::adam;
  cfg.eval_every = o.eval_every;
  if (!o.report.empty() && cfg.eval_every == 0)
    cfg.eval_every = std::max<std::int64_t>(1, o.steps / 50);

  const TrainResult result =
      train(train_ds, centers, provider, cfg, heldout.rows() > 0 ? &heldout : nullptr);
  save_model(result.model, o.out);
  if (!o.report.empty()) {
    Eigen::MatrixXd rows(result.report.rows.size(), 4);
    for (std::size_t i = 0; i < result.report.rows.size(); ++i) {
      const auto& r = result.report.rows[i];
      rows(static_cast<int>(i), 0) = static_cast<double>(r.step);
      rows(static_cast<int>(i), 1) = r.loss;
      rows(static_cast<int>(i), 2) = r.nll;
      rows(static_cast<int>(i), 3) = r.seconds;
    }
    write_csv(o.report, rows, false);
  }
  return 0;
}

// ---- sample ----------------------------------------------------------------

struct SampleOpts {
  std::string model;
  int n = 0;
  std::string mode = "direct";
  std::int64_t steps = 500;
  double eps_stop = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string score = "auto";
  std::string train_data;
  double beta = 1.0;
  double horizon = 1.0;
  bool header = false;
};

int cmd_sample(const SampleOpts& o) {
  if (o.mode != "direct" && o.mode != "sde")
    throw UsageError("sample: --mode must be direct or sde");
  Eigen::MatrixXd samples;

  if (o.score == "empirical") {
    if (o.train_data.empty())
      throw UsageError("sample: --score empirical requires --train-data");
    if (o.mode != "sde")
      throw UsageError("sample: the empirical field has no direct sampler, use --mode sde");
    if (o.eps_stop <= 0.0)
      throw UsageError("sample: empirical field is singular at s = 0, need --eps-stop > 0");
    const Eigen::MatrixXd trainset = read_csv(o.train_data);
    const EmpiricalScoreField field(EmpiricalScore{trainset, o.beta, o.horizon});
    Rng prior_rng = Rng(o.seed).split(streams::kInit);
    Eigen::MatrixXd init = init_from_prior_moments(
        column_mean(trainset), column_cov(trainset), o.beta, o.horizon, o.n, prior_rng);
    samples = sample_reverse_sde(field, std::move(init), {o.steps, o.eps_stop, o.seed});
  } else if (o.score == "auto") {
    if (o.model.empty()) throw UsageError("sample: --model is required");
    const std::string kind = model_file_kind(o.model);
    if (kind == "kernel") {
      const KernelModel model = load_model(o.model);
      if (o.mode == "direct") {
        Rng rng = Rng(o.seed).split(streams::kSampling);
        samples = sample_direct(model, o.n, rng);
      } else {
        const KernelScoreField field(model);
        Rng prior_rng = Rng(o.seed).split(streams::kInit);
        Eigen::MatrixXd init = init_from_prior(model, o.n, prior_rng);
        samples = sample_reverse_sde(field, std::move(init), {o.steps, o.eps_stop, o.seed});
      }
    } else if (kind == "dsm_net") {
      if (o.mode != "sde")
        throw UsageError("sample: dsm_net models sample via --mode sde only");
      if (o.train_data.empty())
        throw UsageError("sample: dsm_net prior needs --train-data for moment matching");
      const DsmScoreNet net = load_dsm_net(o.model);
      const Eigen::MatrixXd trainset = read_csv(o.train_data);
      const DsmScoreField field(net);
      Rng prior_rng = Rng(o.seed).split(streams::kInit);
      Eigen::MatrixXd init =
          init_from_prior_moments(column_mean(trainset), column_cov(trainset),
                                  net.beta(), net.horizon(), o.n, prior_rng);
      samples = sample_reverse_sde(field, std::move(init), {o.steps, o.eps_stop, o.seed});
    } else {
      throw UsageError("sample: unknown model kind: " + kind);
    }
  } else {
    throw UsageError("sample: --score must be auto or empirical");
  }
  write_csv(o.out, samples, o.header);
  return 0;
}

// ---- density ---------------------------------------------------------------

struct DensityOpts {
  std::string model;
  std::string grid;
  double s = 0.0;
  std::string out;
  bool header = false;
};

int cmd_density(const DensityOpts& o) {
  const KernelModel model = load_model(o.model);
  if (model.dim() != 2) throw UsageError("density: grid output requires d = 2");
  const std::vector<double> g = parse_double_list(o.grid);
  if (g.size() != 6) throw UsageError("density: --grid needs xmin,xmax,ymin,ymax,nx,ny");
  const int nx = static_cast<int>(g[4]);
  const int ny = static_cast<int>(g[5]);
  if (nx < 1 || ny < 1) throw UsageError("density: nx and ny must be >= 1");
  if (o.s < 0.0 || o.s > model.horizon())
    throw UsageError("density: --s outside [0, horizon]");
  const KernelModel::Evolved ev = model.evolved(NoiseTime{o.s});
  Eigen::MatrixXd rows(static_cast<std::int64_t>(nx) * ny, 3);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = ny == 1 ? g[2] : g[2] + (g[3] - g[2]) * iy / (ny - 1);
    for (int ix = 0; ix < nx; ++ix) {
      const double x = nx == 1 ? g[0] : g[0] + (g[1] - g[0]) * ix / (nx - 1);
      Eigen::VectorXd p(2);
      p << x, y;
      const std::int64_t r = static_cast<std::int64_t>(iy) * nx + ix;
      rows(r, 0) = x;
      rows(r, 1) = y;
      rows(r, 2) = std::exp(model.log_density(ev, p));
    }
  }
  write_csv(o.out, rows, o.header, {"x", "y", "density"});
  return 0;
}

// ---- ellipses ----------------------------------------------------------------

struct EllipsesOpts {
  std::string model;
  int k = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool header = false;
};

int cmd_ellipses(const EllipsesOpts& o) {
  const KernelModel model = load_model(o.model);
  if (model.dim() != 2) throw UsageError("ellipses: CSV output requires d = 2");
  const std::vector<Ellipse> es = ellipses(model, o.k, o.seed);
  Eigen::MatrixXd rows(es.size(), 8);
  for (std::size_t i = 0; i < es.size(); ++i) {
    const auto& e = es[i];
    const int r = static_cast<int>(i);
    rows(r, 0) = e.center[0];
    rows(r, 1) = e.center[1];
    rows(r, 2) = e.eigvals[0];
    rows(r, 3) = e.eigvals[1];
    rows(r, 4) = e.eigvecs(0, 0);
    rows(r, 5) = e.eigvecs(1, 0);
    rows(r, 6) = e.eigvecs(0, 1);
    rows(r, 7) = e.eigvecs(1, 1);
  }
  write_csv(o.out, rows, o.header,
            {"cx", "cy", "l1", "l2", "v1x", "v1y", "v2x", "v2y"});
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalOpts {
  std::string model;
  std::string test;
  std::string train;
  std::string gen;
  std::string metrics;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_eval(const EvalOpts& o) {
  const std::vector<std::string> wanted = parse_string_list(o.metrics);
  std::ostringstream body;
  body << "{\n";
  bool first = true;
  const auto emit = [&](const std::string& key, const std::string& value) {
    if (!first) body << ",\n";
    first = false;
    body << "  \"" << key << "\": " << value;
  };

  Eigen::MatrixXd test_pts, train_pts, gen_pts;
  const auto need_test = [&] {
    if (o.test.empty()) throw UsageError("eval: metric needs --test");
    if (test_pts.size() == 0) test_pts = read_csv(o.test);
  };
  const auto need_train = [&] {
    if (o.train.empty()) throw UsageError("eval: metric needs --train");
    if (train_pts.size() == 0) train_pts = read_csv(o.train);
  };
  const auto need_gen = [&] {
    if (o.gen.empty()) throw UsageError("eval: metric needs --gen");
    if (gen_pts.size() == 0) gen_pts = read_csv(o.gen);
  };

  for (const std::string& metric : wanted) {
    if (metric == "nll") {
      if (o.model.empty()) throw UsageError("eval: nll needs --model");
      need_test();
      const KernelModel model = load_model(o.model);
      emit("nll", format_g17(nll(model, test_pts)));
      emit("nll_points", std::to_string(test_pts.rows()));
    } else if (metric == "mmd") {
      need_gen();
      need_test();
      double bandwidth = 0.0;
      const double v = mmd2_unbiased_median(gen_pts, test_pts, o.seed, &bandwidth);
      emit("mmd2", format_g17(v));
      emit("mmd_bandwidth", format_g17(bandwidth));
      emit("mmd_sizes", "[" + std::to_string(gen_pts.rows()) + "," +
                            std::to_string(test_pts.rows()) + "]");
    } else if (metric == "nn") {
      need_gen();
      need_train();
      need_test();
      const NnStats gen_stats = nn_distance_stats(gen_pts, train_pts);
      const NnStats held_stats = nn_distance_stats(test_pts, train_pts);
      emit("nn_gen_median", format_g17(gen_stats.median));
      emit("nn_heldout_median", format_g17(held_stats.median));
      emit("nn_median_ratio", format_g17(gen_stats.median / held_stats.median));
    } else {
      throw UsageError("eval: unknown metric: " + metric);
    }
  }
  emit("seed", std::to_string(o.seed));
  body << "\n}\n";
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + o.out);
  out << body.str();
  return 0;
}

// ---- compare-earlystop -------------------------------------------------------

struct CompareOpts {
  std::string data;
  std::string eps;
  std::string model;
  std::uint64_t seed = 0;
  std::string out;
  bool header = false;
};

int cmd_compare_earlystop(const CompareOpts& o) {
  const std::vector<double> eps = parse_double_list(o.eps);
  if (eps.empty()) throw UsageError("compare-earlystop: empty --eps list");
  const Eigen::MatrixXd all = read_csv(o.data);
  const auto [train_ds, test_ds] = split(Dataset{all, DatasetSpec{}}, 0.8, o.seed);
  const KernelModel model = load_model(o.model);
  const int n_gen = test_ds.n();

  Eigen::MatrixXd rows(eps.size() + 1, 3);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw UsageError("compare-earlystop: eps must be > 0");
    auto provider = std::make_shared<TableProvider>(
        TableProvider::initialized(train_ds.points, model.beta(), eps[i]));
    const KernelModel iso(train_ds.points, provider, model.beta(), model.horizon());
    Rng rng = Rng(o.seed).split(streams::kSampling).split(i);
    const Eigen::MatrixXd gen = sample_direct(iso, n_gen, rng);
    const int r = static_cast<int>(i);
    rows(r, 0) = eps[i];
    rows(r, 1) = nll(iso, test_ds.points);
    rows(r, 2) = mmd2_unbiased_median(gen, test_ds.points, o.seed);
  }
  Rng rng = Rng(o.seed).split(streams::kSampling).split(eps.size());
  const Eigen::MatrixXd gen = sample_direct(model, n_gen, rng);
  const int last = static_cast<int>(eps.size());
  rows(last, 0) = 0.0;  // eps = 0 row is the trained model
  rows(last, 1) = nll(model, test_ds.points);
  rows(last, 2) = mmd2_unbiased_median(gen, test_ds.points, o.seed);
  write_csv(o.out, rows, o.header, {"eps", "nll", "mmd2"});
  return 0;
}

// ---- check -----------------------------------------------------------------

int cmd_check(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckResult> results;
  for (const std::string& name : parse_string_list(suite)) {
    const std::vector<CheckResult> batch = run_check_suite(name, seed);
    results.insert(results.end(), batch.begin(), batch.end());
  }
  if (results.empty()) throw UsageError("check: empty --suite list");
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

// ---- --config replay ----------------------------------------------------------

std::vector<std::string> args_from_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open --config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --config JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("command"))
    throw UsageError("--config JSON must be an object with a \"command\" key");
  std::vector<std::string> args;
  args.push_back(j.at("command").get<std::string>());
  const auto value_to_string = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return format_g17(v.get<double>());
    throw UsageError("--config: unsupported value type");
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "command") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) {
        if (!joined.empty()) joined += ",";
        joined += value_to_string(e);
      }
      args.push_back("--" + key);
      args.push_back(joined);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value_to_string(value));
  }
  return args;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  if (!args.empty() && args[0] == "--config") {
    if (args.size() != 2) {
      std::cerr << "usage: --config <run.json>\n";
      return 2;
    }
    try {
      return run_cli(args_from_config(args[1]));
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"kernel score models: data generation, training, sampling, evaluation"};
  app.require_subcommand(1);

  DatagenOpts dg;
  auto* datagen = app.add_subcommand("datagen", "generate a synthetic dataset CSV");
  datagen->add_option("--dataset", dg.dataset, "dataset name")->required();
  datagen->add_option("--n", dg.n, "number of points")->required();
  datagen->add_option("--noise", dg.noise, "isotropic jitter std dev");
  datagen->add_option("--seed", dg.seed, "rng seed");
  datagen->add_option("--out", dg.out, "output CSV path")->required();
  datagen->add_flag("--header", dg.header, "write a header line");
  datagen->add_option("--gmm-dim", dg.gmm_dim, "dimension of the default gmm");

  TrainOpts tr;
  auto* train_cmd = app.add_subcommand("train", "train a kernel score model");
  train_cmd->add_option("--data", tr.data, "training CSV")->required();
  train_cmd->add_option("--centers", tr.centers, "number of kernel centers")->required();
  train_cmd->add_option("--provider", tr.provider, "table|mlp");
  train_cmd->add_option("--steps", tr.steps, "optimizer steps");
  train_cmd->add_option("--batch", tr.batch, "minibatch size");
  train_cmd->add_option("--lr", tr.lr, "learning rate");
  train_cmd->add_option("--beta", tr.beta, "diffusion scale");
  train_cmd->add_option("--horizon", tr.horizon, "noising horizon T");
  train_cmd->add_option("--seed", tr.seed, "rng seed");
  train_cmd->add_option("--out", tr.out, "model JSON path")->required();
  train_cmd->add_option("--report", tr.report, "training report CSV path");
  train_cmd->add_option("--optimizer", tr.optimizer, "adam|sgd");
  train_cmd->add_option("--eval-every", tr.eval_every, "steps between report rows");
  train_cmd->add_option("--heldout-fraction", tr.heldout_fraction,
                        "fraction held out for the report NLL column");

  SampleOpts sm;
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a model");
  sample_cmd->add_option("--model", sm.model, "model JSON path");
  sample_cmd->add_option("--n", sm.n, "number of samples")->required();
  sample_cmd->add_option("--mode", sm.mode, "direct|sde");
  sample_cmd->add_option("--steps", sm.steps, "Euler-Maruyama steps");
  sample_cmd->add_option("--eps-stop", sm.eps_stop, "early-stopping noise time");
  sample_cmd->add_option("--seed", sm.seed, "rng seed");
  sample_cmd->add_option("--out", sm.out, "output CSV path")->required();
  sample_cmd->add_option("--score", sm.score, "auto|empirical");
  sample_cmd->add_option("--train-data", sm.train_data,
                         "training CSV (empirical field / dsm prior)");
  sample_cmd->add_option("--beta", sm.beta, "diffusion scale for the empirical field");
  sample_cmd->add_option("--horizon", sm.horizon, "horizon for the empirical field");
  sample_cmd->add_flag("--header", sm.header, "write a header line");

  DensityOpts de;
  auto* density_cmd = app.add_subcommand("density", "evaluate the density on a 2D grid");
  density_cmd->add_option("--model", de.model, "model JSON path")->required();
  density_cmd->add_option("--grid", de.grid, "xmin,xmax,ymin,ymax,nx,ny")->required();
  density_cmd->add_option("--s", de.s, "noise time (default 0)");
  density_cmd->add_option("--out", de.out, "output CSV path")->required();
  density_cmd->add_flag("--header", de.header, "write a header line");

  EllipsesOpts el;
  auto* ellipses_cmd =
      app.add_subcommand("ellipses", "covariance ellipses at sampled centers");
  ellipses_cmd->add_option("--model", el.model, "model JSON path")->required();
  ellipses_cmd->add_option("--k", el.k, "number of centers")->required();
  ellipses_cmd->add_option("--seed", el.seed, "rng seed");
  ellipses_cmd->add_option("--out", el.out, "output CSV path")->required();
  ellipses_cmd->add_flag("--header", el.header, "write a header line");

  EvalOpts ev;
  auto* eval_cmd = app.add_subcommand("eval", "compute metrics into a JSON report");
  eval_cmd->add_option("--model", ev.model, "model JSON (nll)");
  eval_cmd->add_option("--test", ev.test, "held-out CSV");
  eval_cmd->add_option("--train", ev.train, "training CSV (nn)");
  eval_cmd->add_option("--gen", ev.gen, "generated samples CSV (mmd, nn)");
  eval_cmd->add_option("--metrics", ev.metrics, "comma list of nll,mmd,nn");
  eval_cmd->add_option("--seed", ev.seed, "rng seed");
  eval_cmd->add_option("--out", ev.out, "output JSON path")->required();

  CompareOpts cp;
  auto* compare_cmd = app.add_subcommand(
      "compare-earlystop", "isotropic early-stopping family vs a trained model");
  compare_cmd->add_option("--data", cp.data, "dataset CSV (80/20 split)")->required();
  compare_cmd->add_option("--eps", cp.eps, "comma list of early-stopping times")->required();
  compare_cmd->add_option("--model", cp.model, "trained model JSON")->required();
  compare_cmd->add_option("--seed", cp.seed, "rng seed");
  compare_cmd->add_option("--out", cp.out, "output CSV path")->required();
  compare_cmd->add_flag("--header", cp.header, "write a header line");

  std::string check_suite = "all";
  std::uint64_t check_seed = 0;
  auto* check_cmd = app.add_subcommand("check", "run built-in verification suites");
  check_cmd->add_option("--suite", check_suite, "hjb|gradcheck|equiv|heat|all");
  check_cmd->add_option("--seed", check_seed, "rng seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(datagen)) return cmd_datagen(dg);
    if (app.got_subcommand(train_cmd)) return cmd_train(tr);
    if (app.got_subcommand(sample_cmd)) return cmd_sample(sm);
    if (app.got_subcommand(density_cmd)) return cmd_density(de);
    if (app.got_subcommand(ellipses_cmd)) return cmd_ellipses(el);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(ev);
    if (app.got_subcommand(compare_cmd)) return cmd_compare_earlystop(cp);
    if (app.got_subcommand(check_cmd)) return cmd_check(check_suite, check_seed);
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << " (step " << e.step << ", batch [";
    for (std::size_t i = 0; i < e.batch_indices.size(); ++i)
      std::cerr << (i ? "," : "") << e.batch_indices[i];
    std::cerr << "])\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace kscore
