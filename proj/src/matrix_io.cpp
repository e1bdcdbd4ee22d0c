#include "hpbem/matrix_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace hpbem {

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const std::int32_t r = (std::int32_t)m.rows(), c = (std::int32_t)m.cols();
  out.write("HPBM", 4);
  out.write(reinterpret_cast<const char*>(&r), 4);
  out.write(reinterpret_cast<const char*>(&c), 4);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), sizeof(double) * rm.size());
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  char magic[4];
  std::int32_t r = 0, c = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&r), 4);
  in.read(reinterpret_cast<char*>(&c), 4);
  if (!in || std::memcmp(magic, "HPBM", 4) != 0 || r < 0 || c < 0)
    throw std::invalid_argument("'" + path + "' is not a matrix dump");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(r, c);
  in.read(reinterpret_cast<char*>(rm.data()), sizeof(double) * rm.size());
  if (!in) throw std::invalid_argument("'" + path + "' is truncated");
  return rm;
}

}  // namespace hpbem
