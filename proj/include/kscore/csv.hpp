#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

namespace kscore {

/// One row per matrix row, %.17g columns. `names` (default x0..x{d-1}) is
/// written as a header line when header is true.
void write_csv(const std::string& path, const Eigen::MatrixXd& rows, bool header = false,
               const std::vector<std::string>& names = {});

/// Reads a numeric CSV; a leading non-numeric line is treated as a header
/// and skipped.
Eigen::MatrixXd read_csv(const std::string& path);

}  // namespace kscore
