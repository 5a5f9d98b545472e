#include "matpred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "matpred/error.hpp"

namespace matpred {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "symmetric matrix must be square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index order) {
  return SymMatrix(Eigen::MatrixXd::Identity(order, order));
}

void JacobiEigenSolver::compute(const Eigen::MatrixXd& s, bool with_vectors) {
  const Eigen::Index n = s.rows();
  if (!s.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "non-finite entry in symmetric matrix");
  }
  work_ = s;
  if (with_vectors) vectors_.setIdentity(n, n);

  const double scale = work_.norm();
  const double threshold = kOffDiagonalTolerance * (scale > 0.0 ? scale : 1.0);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * work_(p, q) * work_(p, q);
    if (std::sqrt(off) <= threshold) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = work_(p, q);
        if (apq == 0.0) continue;
        const double theta = (work_(q, q) - work_(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = work_(k, p);
          const double akq = work_(k, q);
          work_(k, p) = c * akp - sn * akq;
          work_(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = work_(p, k);
          const double aqk = work_(q, k);
          work_(p, k) = c * apk - sn * aqk;
          work_(q, k) = sn * apk + c * aqk;
        }
        work_(p, q) = 0.0;
        work_(q, p) = 0.0;
        if (with_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = vectors_(k, p);
            const double vkq = vectors_(k, q);
            vectors_(k, p) = c * vkp - sn * vkq;
            vectors_(k, q) = sn * vkp + c * vkq;
          }
        }
      }
    }
  }

  diag_ = work_.diagonal();
  values_.resize(n);
  if (with_vectors) rotation_.resize(n, n);
  order_.resize(static_cast<size_t>(n));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [this](Eigen::Index a, Eigen::Index b) { return diag_(a) > diag_(b); });
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order_[static_cast<size_t>(i)];
    values_(i) = diag_(src);
    if (!with_vectors) continue;
    rotation_.col(i) = vectors_.col(src);
    // Sign convention: first non-negligible component positive.
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(rotation_(k, i)) > 1e-12) {
        if (rotation_(k, i) < 0.0) rotation_.col(i) *= -1.0;
        break;
      }
    }
  }
}

EigenPair sym_eig(const SymMatrix& s) {
  JacobiEigenSolver solver;
  solver.compute(s.matrix());
  return {solver.rotation(), solver.values()};
}

namespace {

EigenPair checked_pd_eig(const SymMatrix& s) {
  EigenPair eig = sym_eig(s);
  const double largest = eig.values(0);
  const double smallest = eig.values(eig.values.size() - 1);
  if (!(largest > 0.0) || smallest <= kPdRelativeEpsilon * largest) {
    throw Error(ErrorKind::kNotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(smallest) + " not above threshold");
  }
  return eig;
}

}  // namespace

SymMatrix inv_sqrt_pd(const SymMatrix& s) {
  const EigenPair eig = checked_pd_eig(s);
  const Eigen::VectorXd scale = eig.values.array().rsqrt();
  return SymMatrix(eig.rotation * scale.asDiagonal() * eig.rotation.transpose());
}

double log_det_pd(const SymMatrix& s) {
  return checked_pd_eig(s).values.array().log().sum();
}

}  // namespace matpred
