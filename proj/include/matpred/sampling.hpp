#pragma once

#include <Eigen/Dense>

#include "matpred/linalg.hpp"
#include "matpred/random_stream.hpp"

namespace matpred {

// Problem shape: r rows, q columns, q >= r >= 1.
class Dims {
 public:
  Dims(int r, int q);

  int r() const { return r_; }
  int q() const { return q_; }
  int size() const { return r_ * q_; }

  friend bool operator==(const Dims&, const Dims&) = default;

 private:
  int r_;
  int q_;
};

// r x q matrix (a mean Theta or an observation X, Y, W, Z) with q >= r.
class MeanMatrix {
 public:
  explicit MeanMatrix(Eigen::MatrixXd entries);

  static MeanMatrix zeros(const Dims& dims);

  Dims dims() const { return Dims(static_cast<int>(m_.rows()), static_cast<int>(m_.cols())); }
  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  const Eigen::MatrixXd& entries() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  // Theta Theta^T.
  SymMatrix gram() const { return SymMatrix(m_ * m_.transpose()); }

 private:
  Eigen::MatrixXd m_;
};

void require_same_dims(const MeanMatrix& a, const MeanMatrix& b);

// mean + sqrt(v) G with G iid standard normal entries, drawn row-major.
MeanMatrix sample_matrix_normal(const MeanMatrix& mean, double v, RandomStream& stream);

// In-place variant for hot loops: out = mean + sqrt(v) G.
void sample_matrix_normal_into(const Eigen::MatrixXd& mean, double v, RandomStream& stream,
                               Eigen::MatrixXd& out);

double log_matnorm_density(const MeanMatrix& z, const MeanMatrix& mean, double v);

// Wishart(df, I_r) by the Bartlett construction; non-integer df allowed.
SymMatrix sample_wishart_identity(double df, int r, RandomStream& stream);

// Matrix-variate beta on 0 < Omega < I with density proportional to
// |Omega|^(a/2-1) |I-Omega|^(b/2-1), drawn as C A C with
// A ~ Wishart(a+r-1, I), B ~ Wishart(b+r-1, I), C = (A+B)^(-1/2).
SymMatrix sample_matrix_beta(double a, double b, int r, RandomStream& stream);

// Reusable matrix-beta sampler. Holds all scratch space so repeated draws do
// not allocate. Produces the same sequence as sample_matrix_beta.
class MatrixBetaSampler {
 public:
  MatrixBetaSampler(double a, double b, int r);

  const Eigen::MatrixXd& draw(RandomStream& stream);

 private:
  void draw_wishart(double df, RandomStream& stream, Eigen::MatrixXd& out);

  double df_a_;
  double df_b_;
  int r_;
  Eigen::MatrixXd bartlett_;
  Eigen::MatrixXd wishart_a_;
  Eigen::MatrixXd wishart_b_;
  Eigen::MatrixXd inv_sqrt_;
  Eigen::MatrixXd omega_;
  JacobiEigenSolver eig_;
};

}  // namespace matpred
