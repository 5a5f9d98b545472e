#include <doctest.h>

#include <cmath>

#include "matpred/error.hpp"
#include "matpred/estimators.hpp"
#include "test_util.hpp"

using namespace matpred;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kInvalidInput;
}

// X with X X^T = diag(l), rows supported on disjoint columns.
MeanMatrix with_gram(std::initializer_list<double> l, int q) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<int>(l.size()), q);
  int i = 0;
  for (double v : l) {
    x(i, i) = std::sqrt(v);
    ++i;
  }
  return MeanMatrix(x);
}

}  // namespace

TEST_CASE("em_estimate examples") {
  // X X^T = alpha v I gives zero.
  const MeanMatrix x = with_gram({12.0 * 0.5, 12.0 * 0.5}, 15);
  CHECK(em_estimate(x, 0.5).entries().cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, 15);
  row(0, 0) = 5.0;
  CHECK((em_estimate(MeanMatrix(row), 1.0).entries() - (1.0 - 13.0 / 25.0) * row).norm() < 1e-14);

  RandomStream rs(1, 0);
  const Eigen::MatrixXd rot = testing::random_orthogonal(2, rs);
  const MeanMatrix xr(rot * with_gram({20.0, 10.0}, 15).entries());
  const Eigen::MatrixXd direct =
      (Eigen::MatrixXd::Identity(2, 2) - 12.0 * (xr.entries() * xr.entries().transpose()).inverse()) *
      xr.entries();
  CHECK((em_estimate(xr, 1.0).entries() - direct).norm() < 1e-12);
  // In the eigenbasis the row scales are 0.4 and -0.2.
  const Eigen::MatrixXd in_basis = rot.transpose() * em_estimate(xr, 1.0).entries();
  CHECK(in_basis(0, 0) == doctest::Approx(0.4 * std::sqrt(20.0)));
  CHECK(in_basis(1, 1) == doctest::Approx(-0.2 * std::sqrt(10.0)));
}

TEST_CASE("js_estimate examples") {
  RandomStream rs(2, 0);
  Eigen::MatrixXd g = testing::gaussian_matrix(2, 15, rs);
  const MeanMatrix x56(g * std::sqrt(56.0) / g.norm());
  CHECK((js_estimate(x56, 1.0).entries() - 0.5 * x56.entries()).norm() < 1e-13);
  const MeanMatrix x28(g * std::sqrt(28.0) / g.norm());
  CHECK(js_estimate(x28, 1.0).entries().cwiseAbs().maxCoeff() < 1e-14);
  const MeanMatrix x14(g * std::sqrt(14.0) / g.norm());
  CHECK((js_estimate(x14, 1.0).entries() + x14.entries()).norm() < 1e-13);
}

TEST_CASE("estimator errors") {
  CHECK(kind_of([] { js_estimate(MeanMatrix::zeros(Dims(2, 15)), 1.0); }) == ErrorKind::kSingularInput);
  CHECK(kind_of([] { js_estimate(MeanMatrix(Eigen::MatrixXd::Ones(1, 2)), 1.0); }) ==
        ErrorKind::kPreconditionViolated);
  CHECK(kind_of([] { em_estimate(MeanMatrix(Eigen::MatrixXd::Ones(2, 3)), 1.0); }) ==
        ErrorKind::kPreconditionViolated);
  Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(2, 15);
  rank1.row(0).setOnes();
  rank1.row(1).setOnes();
  CHECK(kind_of([&] { em_estimate(MeanMatrix(rank1), 1.0); }) == ErrorKind::kSingularInput);
  CHECK(kind_of([&] { ms_estimate(MeanMatrix(rank1), 1.0, {1.0, 1.0}, 0.0); }) ==
        ErrorKind::kSingularInput);
  CHECK(kind_of([] { ms_estimate(with_gram({2.0, 1.0}, 5), 1.0, {1.0}, 0.0); }) ==
        ErrorKind::kDimensionMismatch);
  CHECK_THROWS_AS(js_estimate(with_gram({2.0, 1.0}, 5), 0.0), Error);
}

TEST_CASE("ms_estimate reduces to em and js") {
  RandomStream rs(3, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const MeanMatrix x(testing::gaussian_matrix(2, 15, rs) * 2.0);
    CHECK((ms_estimate(x, 0.7, {12.0, 12.0}, 0.0).entries() - em_estimate(x, 0.7).entries())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((ms_estimate(x, 0.7, {0.0, 0.0}, 28.0).entries() - js_estimate(x, 0.7).entries())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("orthogonal equivariance of all estimators") {
  RandomStream rs(4, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const MeanMatrix x(testing::gaussian_matrix(2, 15, rs) * 1.5);
    const Eigen::MatrixXd p = testing::random_orthogonal(2, rs);
    const Eigen::MatrixXd q = testing::random_orthogonal(15, rs);
    const MeanMatrix rotated(p * x.entries() * q);
    CHECK((em_estimate(rotated, 1.0).entries() - p * em_estimate(x, 1.0).entries() * q).norm() < 1e-9);
    CHECK((js_estimate(rotated, 1.0).entries() - p * js_estimate(x, 1.0).entries() * q).norm() < 1e-9);
    const auto ms = [](const MeanMatrix& m) { return ms_estimate(m, 1.0, {14.0, 12.0}, 2.0); };
    const Eigen::MatrixXd lhs = ms(rotated).entries();
    CHECK(lhs.allFinite());
    CHECK((lhs - p * ms(x).entries() * q).norm() < 1e-9);
  }
}

TEST_CASE("js shrinks toward the origin when its factor lies in [0, 1]") {
  RandomStream rs(5, 0);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MeanMatrix x(testing::gaussian_matrix(2, 15, rs) * (0.5 + 2.0 * rs.uniform()));
    const double tr = x.entries().squaredNorm();
    const double factor = 1.0 - 28.0 / tr;
    if (factor < 0.0 || factor > 1.0) continue;
    ++tested;
    CHECK((js_estimate(x, 1.0).entries() * x.entries().transpose()).trace() <= tr);
  }
  CHECK(tested > 20);
}
