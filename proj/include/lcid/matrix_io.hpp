#pragma once

#include <Eigen/Dense>
#include <string>

namespace lcid {

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

/// Matrix CSV: a "rows,cols" header line, then one comma-separated row per
/// matrix row, row-major, 17 significant digits.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);

}  // namespace lcid
