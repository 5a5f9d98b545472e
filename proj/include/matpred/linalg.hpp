#pragma once

#include <Eigen/Dense>
#include <vector>

namespace matpred {

// Real symmetric matrix. Construction symmetrizes the input as (A + A^T) / 2,
// so entries(i, j) == entries(j, i) holds exactly afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix identity(Eigen::Index order);

  Eigen::Index order() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

// Columns of `rotation` are eigenvectors; `values` sorted non-increasing.
struct EigenPair {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd values;
};

// Cyclic Jacobi solver with reusable workspace. Hot loops keep one instance
// per thread to avoid reallocating for every draw.
class JacobiEigenSolver {
 public:
  static constexpr double kOffDiagonalTolerance = 1e-12;
  static constexpr int kMaxSweeps = 100;

  // Throws kInvalidInput on non-finite entries.
  void compute(const Eigen::MatrixXd& s, bool with_vectors = true);

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& rotation() const { return rotation_; }

 private:
  Eigen::MatrixXd work_;
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd rotation_;
  Eigen::VectorXd values_;
  Eigen::VectorXd diag_;
  std::vector<Eigen::Index> order_;
};

EigenPair sym_eig(const SymMatrix& s);

// T with T S T = I. Throws kNotPositiveDefinite when the smallest eigenvalue
// is <= 1e-12 times the largest.
SymMatrix inv_sqrt_pd(const SymMatrix& s);

double log_det_pd(const SymMatrix& s);

// Positive-definiteness threshold shared by the PD routines above.
inline constexpr double kPdRelativeEpsilon = 1e-12;

}  // namespace matpred
