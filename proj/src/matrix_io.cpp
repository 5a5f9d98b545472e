#include "matpred/matrix_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "matpred/error.hpp"
#include "matpred/format.hpp"

namespace matpred {

Eigen::MatrixXd read_matrix(std::istream& in) {
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw Error(ErrorKind::kInvalidInput, "matrix header must be 'rows cols' with positive sizes");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw Error(ErrorKind::kInvalidInput, "matrix ended early at entry (" + std::to_string(i) +
                                                  ", " + std::to_string(j) + ")");
      }
    }
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorKind::kInvalidInput, "trailing data after matrix");
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_g17(m(i, j));
    out << '\n';
  }
}

}  // namespace matpred
