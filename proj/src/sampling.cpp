#include "matpred/sampling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "matpred/error.hpp"

namespace matpred {

Dims::Dims(int r, int q) : r_(r), q_(q) {
  if (r < 1 || q < r) {
    throw Error(ErrorKind::kInvalidInput,
                "dims require q >= r >= 1, got r=" + std::to_string(r) + " q=" + std::to_string(q));
  }
}

MeanMatrix::MeanMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  (void)Dims(static_cast<int>(m_.rows()), static_cast<int>(m_.cols()));
  if (!m_.allFinite()) throw Error(ErrorKind::kInvalidInput, "non-finite matrix entry");
}

MeanMatrix MeanMatrix::zeros(const Dims& dims) {
  return MeanMatrix(Eigen::MatrixXd::Zero(dims.r(), dims.q()));
}

void require_same_dims(const MeanMatrix& a, const MeanMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "matrix shapes differ");
  }
}

void sample_matrix_normal_into(const Eigen::MatrixXd& mean, double v, RandomStream& stream,
                               Eigen::MatrixXd& out) {
  const double sd = std::sqrt(v);
  out.resize(mean.rows(), mean.cols());
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    for (Eigen::Index j = 0; j < mean.cols(); ++j) out(i, j) = mean(i, j) + sd * stream.normal();
}

MeanMatrix sample_matrix_normal(const MeanMatrix& mean, double v, RandomStream& stream) {
  if (!(v >= 0.0)) throw Error(ErrorKind::kInvalidInput, "variance must be >= 0");
  if (v == 0.0) return mean;
  Eigen::MatrixXd out;
  sample_matrix_normal_into(mean.entries(), v, stream, out);
  return MeanMatrix(std::move(out));
}

double log_matnorm_density(const MeanMatrix& z, const MeanMatrix& mean, double v) {
  require_same_dims(z, mean);
  if (!(v > 0.0)) throw Error(ErrorKind::kInvalidInput, "variance must be > 0");
  const double n = static_cast<double>(z.rows()) * z.cols();
  return -0.5 * n * std::log(2.0 * std::numbers::pi * v) -
         (z.entries() - mean.entries()).squaredNorm() / (2.0 * v);
}

namespace {

void bartlett_factor(double df, int r, RandomStream& stream, Eigen::MatrixXd& t) {
  t.setZero(r, r);
  for (int i = 0; i < r; ++i) {
    t(i, i) = std::sqrt(stream.chi_squared(df - i));
    for (int j = 0; j < i; ++j) t(i, j) = stream.normal();
  }
}

void check_wishart_df(double df, int r) {
  if (r < 1) throw Error(ErrorKind::kInvalidInput, "order must be >= 1");
  if (!(df > r - 1)) {
    throw Error(ErrorKind::kInvalidDegreesOfFreedom,
                "df=" + std::to_string(df) + " must exceed r-1=" + std::to_string(r - 1));
  }
}

}  // namespace

SymMatrix sample_wishart_identity(double df, int r, RandomStream& stream) {
  check_wishart_df(df, r);
  Eigen::MatrixXd t;
  bartlett_factor(df, r, stream, t);
  return SymMatrix(t * t.transpose());
}

MatrixBetaSampler::MatrixBetaSampler(double a, double b, int r)
    : df_a_(a + r - 1), df_b_(b + r - 1), r_(r) {
  if (r < 1) throw Error(ErrorKind::kInvalidInput, "order must be >= 1");
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::kInvalidShape,
                "matrix beta needs a > 0 and b > 0, got a=" + std::to_string(a) +
                    " b=" + std::to_string(b));
  }
}

void MatrixBetaSampler::draw_wishart(double df, RandomStream& stream, Eigen::MatrixXd& out) {
  bartlett_factor(df, r_, stream, bartlett_);
  out.noalias() = bartlett_ * bartlett_.transpose();
}

const Eigen::MatrixXd& MatrixBetaSampler::draw(RandomStream& stream) {
  draw_wishart(df_a_, stream, wishart_a_);
  draw_wishart(df_b_, stream, wishart_b_);
  wishart_b_ += wishart_a_;
  eig_.compute(wishart_b_);
  const auto& values = eig_.values();
  if (!(values(r_ - 1) > kPdRelativeEpsilon * values(0))) {
    throw Error(ErrorKind::kNotPositiveDefinite, "Wishart sum is numerically singular");
  }
  inv_sqrt_.noalias() =
      eig_.rotation() * values.array().rsqrt().matrix().asDiagonal() * eig_.rotation().transpose();
  omega_.noalias() = inv_sqrt_ * wishart_a_ * inv_sqrt_;
  omega_ = 0.5 * (omega_ + omega_.transpose()).eval();
  return omega_;
}

SymMatrix sample_matrix_beta(double a, double b, int r, RandomStream& stream) {
  MatrixBetaSampler sampler(a, b, r);
  return SymMatrix(sampler.draw(stream));
}

}  // namespace matpred
