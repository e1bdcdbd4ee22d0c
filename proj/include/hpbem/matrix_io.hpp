#pragma once

#include <string>

#include <Eigen/Dense>

namespace hpbem {

// Binary layout: 4 bytes "HPBM", int32 rows, int32 cols (little endian),
// then rows*cols float64 in row-major order.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

}  // namespace hpbem
