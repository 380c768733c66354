#include "kscore/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kscore/model_io.hpp"

namespace kscore {

void write_csv(const std::string& path, const Eigen::MatrixXd& rows, bool header,
               const std::vector<std::string>& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (header) {
    if (!names.empty()) {
      for (std::size_t i = 0; i < names.size(); ++i)
        out << (i ? "," : "") << names[i];
    } else {
      for (int c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << "x" << c;
    }
    out << '\n';
  }
  for (int r = 0; r < rows.rows(); ++r) {
    for (int c = 0; c < rows.cols(); ++c)
      out << (c ? "," : "") << format_g17(rows(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (end == cell.c_str() || (end && *end != '\0' && *end != '\r')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw std::runtime_error("read_csv: non-numeric row in " + path);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return m;
}

}  // namespace kscore
