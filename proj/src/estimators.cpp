#include "matpred/estimators.hpp"

#include <string>

#include "matpred/error.hpp"
#include "matpred/linalg.hpp"

namespace matpred {

namespace {

constexpr double kSingularRelative = 1e-12;

void require_variance(double v_x) {
  if (!(v_x > 0.0)) throw Error(ErrorKind::kInvalidInput, "v_x must be > 0");
}

EigenPair nonsingular_gram_eig(const MeanMatrix& x) {
  EigenPair eig = sym_eig(x.gram());
  const double largest = eig.values(0);
  if (!(largest > 0.0) || !(eig.values(eig.values.size() - 1) > kSingularRelative * largest)) {
    throw Error(ErrorKind::kSingularInput, "X X^T is numerically singular");
  }
  return eig;
}

}  // namespace

MeanMatrix ms_estimate(const MeanMatrix& x, double v_x, const std::vector<double>& alphas,
                       double beta) {
  require_variance(v_x);
  if (alphas.size() != static_cast<size_t>(x.rows())) {
    throw Error(ErrorKind::kDimensionMismatch, "alphas must have length r");
  }
  const EigenPair eig = nonsingular_gram_eig(x);
  const double trace = eig.values.sum();
  Eigen::VectorXd factors(x.rows());
  for (int i = 0; i < x.rows(); ++i) {
    factors(i) = alphas[static_cast<size_t>(i)] / eig.values(i) + beta / trace;
  }
  // beta/tr I commutes with H, so both terms share the eigenbasis.
  const Eigen::MatrixXd shrink = eig.rotation * factors.asDiagonal() * eig.rotation.transpose();
  return MeanMatrix(x.entries() - v_x * shrink * x.entries());
}

MeanMatrix em_estimate(const MeanMatrix& x, double v_x) {
  const int r = x.rows();
  const int q = x.cols();
  if (q < r + 2) {
    throw Error(ErrorKind::kPreconditionViolated,
                "Efron-Morris estimator needs q >= r + 2, got r=" + std::to_string(r) +
                    " q=" + std::to_string(q));
  }
  return ms_estimate(x, v_x, std::vector<double>(static_cast<size_t>(r), q - r - 1.0), 0.0);
}

MeanMatrix js_estimate(const MeanMatrix& x, double v_x) {
  require_variance(v_x);
  const int qr = x.rows() * x.cols();
  if (qr < 3) throw Error(ErrorKind::kPreconditionViolated, "James-Stein estimator needs qr >= 3");
  const double trace = x.entries().squaredNorm();
  if (trace == 0.0) throw Error(ErrorKind::kSingularInput, "X is zero");
  return MeanMatrix((1.0 - (qr - 2.0) * v_x / trace) * x.entries());
}

}  // namespace matpred
