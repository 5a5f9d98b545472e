#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace matpred {

// Matrix text format: a header line "rows cols" followed by the entries,
// whitespace-delimited, one matrix row per line.
Eigen::MatrixXd read_matrix(std::istream& in);
Eigen::MatrixXd read_matrix_file(const std::string& path);

// Entries are written with 17 significant digits.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace matpred
