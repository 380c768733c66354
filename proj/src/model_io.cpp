#include "kscore/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kscore {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void emit_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << format_g17(v[i]);
  }
  os << ']';
}

void emit_rows(std::ostream& os, const Eigen::MatrixXd& m) {
  os << '[';
  for (int r = 0; r < m.rows(); ++r) {
    if (r) os << ',';
    os << '[';
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_g17(m(r, c));
    }
    os << ']';
  }
  os << ']';
}

void emit_widths(std::ostream& os, const std::vector<int>& widths) {
  os << '[';
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) os << ',';
    os << widths[i];
  }
  os << ']';
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return nlohmann::json::parse(in);
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  int i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

Eigen::MatrixXd rows_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

void save_model(const KernelModel& model, const std::string& path) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"schema_version\": 1,\n";
  os << "  \"kind\": \"kernel\",\n";
  os << "  \"d\": " << model.dim() << ",\n";
  os << "  \"beta\": " << format_g17(model.beta()) << ",\n";
  os << "  \"horizon\": " << format_g17(model.horizon()) << ",\n";
  os << "  \"centers\": ";
  emit_rows(os, model.centers());
  os << ",\n";
  os << "  \"provider\": {\"kind\": \"" << model.provider().kind() << "\", ";
  if (const auto* mlp = dynamic_cast<const MlpProvider*>(&model.provider())) {
    os << "\"widths\": ";
    emit_widths(os, mlp->mlp().widths);
    os << ", ";
  }
  os << "\"parameters\": ";
  emit_vector(os, model.provider().params());
  os << "}\n}\n";
  write_file(path, os.str());
}

KernelModel load_model(const std::string& path) {
  const nlohmann::json j = parse_file(path);
  if (j.value("kind", "kernel") != "kernel")
    throw std::runtime_error("load_model: not a kernel model file: " + path);
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("load_model: unsupported schema version");
  const int d = j.at("d").get<int>();
  const double beta = j.at("beta").get<double>();
  const double horizon = j.at("horizon").get<double>();
  const Eigen::MatrixXd centers = rows_from_json(j.at("centers"));
  if (centers.cols() != d) throw std::runtime_error("load_model: center dim mismatch");
  const auto& pj = j.at("provider");
  const std::string kind = pj.at("kind").get<std::string>();
  const Eigen::VectorXd params = vector_from_json(pj.at("parameters"));
  std::shared_ptr<PrecisionProvider> provider;
  if (kind == "table") {
    provider = std::make_shared<TableProvider>(centers, params);
  } else if (kind == "mlp") {
    std::vector<int> widths;
    for (const auto& w : pj.at("widths")) widths.push_back(w.get<int>());
    Mlp mlp = Mlp::with_widths(widths);
    if (mlp.params.size() != params.size())
      throw std::runtime_error("load_model: mlp parameter count mismatch");
    mlp.params = params;
    provider = std::make_shared<MlpProvider>(d, std::move(mlp));
  } else {
    throw std::runtime_error("load_model: unknown provider kind: " + kind);
  }
  return KernelModel(centers, provider, beta, horizon);
}

void save_dsm_net(const DsmScoreNet& net, const std::string& path) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"schema_version\": 1,\n";
  os << "  \"kind\": \"dsm_net\",\n";
  os << "  \"d\": " << net.dim() << ",\n";
  os << "  \"beta\": " << format_g17(net.beta()) << ",\n";
  os << "  \"horizon\": " << format_g17(net.horizon()) << ",\n";
  os << "  \"widths\": ";
  emit_widths(os, net.mlp().widths);
  os << ",\n";
  os << "  \"parameters\": ";
  emit_vector(os, net.mlp().params);
  os << "\n}\n";
  write_file(path, os.str());
}

DsmScoreNet load_dsm_net(const std::string& path) {
  const nlohmann::json j = parse_file(path);
  if (j.value("kind", "") != "dsm_net")
    throw std::runtime_error("load_dsm_net: not a dsm_net file: " + path);
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("load_dsm_net: unsupported schema version");
  std::vector<int> widths;
  for (const auto& w : j.at("widths")) widths.push_back(w.get<int>());
  Mlp mlp = Mlp::with_widths(widths);
  const Eigen::VectorXd params = vector_from_json(j.at("parameters"));
  if (mlp.params.size() != params.size())
    throw std::runtime_error("load_dsm_net: parameter count mismatch");
  mlp.params = params;
  return DsmScoreNet(std::move(mlp), j.at("beta").get<double>(),
                     j.at("horizon").get<double>());
}

std::string model_file_kind(const std::string& path) {
  return parse_file(path).value("kind", "kernel");
}

}  // namespace kscore
