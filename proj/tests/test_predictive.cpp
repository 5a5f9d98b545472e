#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "matpred/error.hpp"
#include "matpred/predictive.hpp"
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

MeanMatrix scalar(double x) { return MeanMatrix(Eigen::MatrixXd::Constant(1, 1, x)); }

double log_normal_pdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - (x - mean) * (x - mean) / (2.0 * var);
}

MeanMatrix first_entry(int q, double value) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, q);
  m(0, 0) = value;
  return MeanMatrix(m);
}

}  // namespace

TEST_CASE("VarianceSpec derived quantities") {
  const VarianceSpec vs(0.1, 1.0);
  CHECK(vs.vs() == doctest::Approx(1.1));
  CHECK(vs.vw() == doctest::Approx(1.0 / 11.0));
  CHECK(vs.vw() < vs.vx());
  CHECK_THROWS_AS(VarianceSpec(0.0, 1.0), Error);
  CHECK_THROWS_AS(VarianceSpec(1.0, -1.0), Error);
}

TEST_CASE("phi_u_log examples") {
  CHECK(phi_u_log(scalar(0), scalar(0), VarianceSpec(0.5, 0.5)) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  const MeanMatrix z = MeanMatrix::zeros(Dims(2, 15));
  const VarianceSpec vs(1.0, 1.0);
  const double at_equal = phi_u_log(z, z, vs);
  CHECK(at_equal == doctest::Approx(-15.0 * std::log(4.0 * std::numbers::pi)).epsilon(1e-14));
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 15);
  y(1, 4) = 2.0;  // ||Y - X||^2 = 4 = 2 v_s
  CHECK(phi_u_log(z, MeanMatrix(y), vs) == doctest::Approx(at_equal - 1.0).epsilon(1e-14));
}

TEST_CASE("recombine_w examples") {
  RandomStream rs(1, 0);
  const MeanMatrix t(testing::gaussian_matrix(2, 5, rs));
  CHECK((recombine_w(t, t, VarianceSpec(0.3, 2.0)).entries() - t.entries()).norm() < 1e-14);
  const MeanMatrix x(testing::gaussian_matrix(2, 5, rs)), y(testing::gaussian_matrix(2, 5, rs));
  CHECK((recombine_w(x, y, VarianceSpec(1.5, 1.5)).entries() - (x.entries() + y.entries()) / 2.0)
            .norm() < 1e-14);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2, 15);
  block(0, 0) = block(1, 1) = 1.0;
  const MeanMatrix w = recombine_w(MeanMatrix(block), MeanMatrix::zeros(Dims(2, 15)), VarianceSpec(0.1, 1.0));
  CHECK((w.entries() - 10.0 / 11.0 * block).norm() < 1e-14);
}

TEST_CASE("marginal_mc: uniform is exact") {
  RandomStream rs(2, 0);
  const auto est = marginal_mc(prior::Uniform{}, MeanMatrix::zeros(Dims(2, 15)), 1.0, 100, rs);
  CHECK(est.log_value == 0.0);
  CHECK(est.std_err_log == 0.0);
  CHECK_THROWS_AS(marginal_mc(prior::Uniform{}, MeanMatrix::zeros(Dims(2, 15)), 1.0, 1, rs), Error);
}

TEST_CASE("marginal_mc: conjugate prior matches the Gaussian convolution") {
  const prior::ConjugateFixedOmega c{0.4, 1.0};
  for (double z : {0.0, 0.7, -2.5}) {
    for (double v : {0.1, 1.0}) {
      RandomStream rs(3, static_cast<std::uint64_t>(100 * (z + 3) + 10 * v));
      const auto est = marginal_mc(c, scalar(z), v, 100000, rs);
      const double oracle = log_normal_pdf(z, 0.0, v + c.tau2());
      CHECK(std::abs(est.log_value - oracle) <= 3.0 * est.std_err_log);
    }
  }
}

TEST_CASE("marginal_mc: EM prior at r=1, q=3 against radial quadrature") {
  const MeanMatrix z = first_entry(3, 1.0);
  RandomStream rs(4, 0);
  const auto est = marginal_mc(prior::EM{}, z, 1.0, 100000, rs);
  // E ||Theta||^-1 for Theta ~ N(mu e1, I_3): the norm has density
  // (rho / mu)(phi(rho - mu) - phi(rho + mu)) on (0, inf).
  const double mu = 1.0;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  auto integrand = [&](double rho) { return (phi(rho - mu) - phi(rho + mu)) / mu; };
  const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
  CHECK(radial == doctest::Approx(std::erf(mu / std::sqrt(2.0)) / mu).epsilon(1e-10));
  CHECK(std::abs(est.log_value - std::log(radial)) <= 3.0 * est.std_err_log);
}

TEST_CASE("log_phi_pi_mc: uniform reduces to phi_U exactly") {
  RandomStream rs(5, 0);
  const MeanMatrix x(testing::gaussian_matrix(2, 15, rs)), y(testing::gaussian_matrix(2, 15, rs));
  const VarianceSpec vs(0.1, 1.0);
  const auto est = log_phi_pi_mc(prior::Uniform{}, x, y, vs, 50, rs);
  CHECK(est.log_value == phi_u_log(x, y, vs));
  CHECK(est.std_err_log == 0.0);
}

TEST_CASE("log_phi_pi_mc: conjugate prior matches the closed-form predictive") {
  const prior::ConjugateFixedOmega c{0.5, 1.0};
  const double t2 = c.tau2();
  for (const auto& [vx, vy] : std::vector<std::pair<double, double>>{{0.1, 1.0}, {1.0, 1.0}, {1.0, 0.1}}) {
    const double x = 0.8, y = -0.4;
    RandomStream rs(6, static_cast<std::uint64_t>(vx * 10 + vy * 100));
    const auto est = log_phi_pi_mc(c, scalar(x), scalar(y), VarianceSpec(vx, vy), 100000, rs);
    // Posterior Theta | x ~ N(s x, s vx), s = t2 / (t2 + vx); Y | x ~ N(s x, vy + s vx).
    const double s = t2 / (t2 + vx);
    const double oracle = log_normal_pdf(y, s * x, vy + s * vx);
    CHECK(std::abs(est.log_value - oracle) <= 3.0 * est.std_err_log);
  }
}

TEST_CASE("log_phi_pi_mc: ratio form is literal") {
  RandomStream rs(7, 0);
  const MeanMatrix x(testing::gaussian_matrix(2, 15, rs)), y(testing::gaussian_matrix(2, 15, rs));
  const VarianceSpec vs(1.0, 0.1);
  const RandomStream base(99, 3);
  RandomStream stream = base;
  const auto est = log_phi_pi_mc(prior::MS1{}, x, y, vs, 2000, stream);
  RandomStream s_num = base.split(0), s_den = base.split(1);
  const auto num = marginal_mc(prior::MS1{}, recombine_w(x, y, vs), vs.vw(), 2000, s_num);
  const auto den = marginal_mc(prior::MS1{}, x, vs.vx(), 2000, s_den);
  CHECK(est.log_marginal_ratio == num.log_value - den.log_value);
  CHECK(est.log_phi_u == phi_u_log(x, y, vs));
  CHECK(est.log_value == est.log_marginal_ratio + est.log_phi_u);
  CHECK(est.std_err_log == doctest::Approx(std::hypot(num.std_err_log, den.std_err_log)));
}

TEST_CASE("log_phi_pi_mc preconditions") {
  RandomStream rs(8, 0);
  CHECK(kind_of([&] { log_phi_pi_mc(prior::JS{}, scalar(1), scalar(1), VarianceSpec(1, 1), 10, rs); }) ==
        ErrorKind::kPreconditionViolated);
  CHECK(kind_of([&] { log_phi_pi_mc(prior::GB{}, scalar(1), scalar(1), VarianceSpec(1, 1), 10, rs); }) ==
        ErrorKind::kUnsupportedSpec);
}

TEST_CASE("gb_weight examples") {
  RandomStream rs(9, 0);
  const MeanMatrix z(testing::gaussian_matrix(2, 6, rs));
  const SymMatrix omega = sample_matrix_beta(5.0, 3.0, 2, rs);
  const Eigen::MatrixXd zzt = z.entries() * z.entries().transpose();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);

  CHECK(gb_weight(omega, z, 0.7, 0.7) ==
        doctest::Approx(-(omega.matrix() * zzt).trace() / 1.4).epsilon(1e-13));
  const double v = 0.3, v0 = 1.2;
  const Eigen::MatrixXd m = id - (1.0 - v / v0) * omega.matrix();
  CHECK(gb_weight(omega, MeanMatrix::zeros(Dims(2, 6)), v, v0) ==
        doctest::Approx(-3.0 * std::log(m.determinant())).epsilon(1e-13));
  const double full = -3.0 * std::log(m.determinant()) -
                      (omega.matrix() * m.inverse() * zzt).trace() / (2.0 * v0);
  CHECK(gb_weight(omega, z, v, v0) == doctest::Approx(full).epsilon(1e-13));

  // Omega -> I limit.
  const double eps = 1e-9;
  const SymMatrix near_id((1.0 - eps) * id);
  const double limit = -6.0 * std::log(v / v0) - z.entries().squaredNorm() / (2.0 * v);
  CHECK(gb_weight(near_id, z, v, v0) == doctest::Approx(limit).epsilon(1e-6));

  CHECK(kind_of([&] { gb_weight(SymMatrix(1.5 * id), z, v, v0); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([&] { gb_weight(SymMatrix(0.0 * id), z, v, v0); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("GbWeightKernel agrees with gb_weight") {
  RandomStream rs(10, 0);
  const MeanMatrix z(testing::gaussian_matrix(3, 7, rs));
  GbWeightKernel kernel(z.entries(), 0.25, 1.0);
  for (int i = 0; i < 20; ++i) {
    const SymMatrix om = sample_matrix_beta(9.0, 3.0, 3, rs);
    CHECK(kernel.log_weight(om.matrix()) == doctest::Approx(gb_weight(om, z, 0.25, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("log_phi_gb_mc basics") {
  const MeanMatrix zero = MeanMatrix::zeros(Dims(2, 15));
  const VarianceSpec vs(0.1, 1.0);
  RandomStream a(11, 0), b(11, 0);
  const auto e1 = log_phi_gb_mc(1.0, 3.0, 1.0, zero, zero, vs, 5000, a);
  const auto e2 = log_phi_gb_mc(1.0, 3.0, 1.0, zero, zero, vs, 5000, b);
  CHECK(e1.log_value == e2.log_value);
  CHECK(e1.std_err_log == e2.std_err_log);
  CHECK(e1.log_marginal_ratio > 0.0);
  CHECK(e1.log_value == e1.log_marginal_ratio + phi_u_log(zero, zero, vs));

  RandomStream rs(12, 0);
  CHECK(kind_of([&] { log_phi_gb_mc(1.0, 3.0, 0.05, zero, zero, vs, 100, rs); }) ==
        ErrorKind::kPreconditionViolated);
}

TEST_CASE("log_phi_gb_mc at r = 1 matches the dual-form quadrature") {
  const int q = 15;
  const MeanMatrix x = first_entry(q, 0.3), y = first_entry(q, -0.2);
  const VarianceSpec vs(0.1, 1.0);
  RandomStream rs(13, 0);
  const auto est = log_phi_gb_mc(1.0, 3.0, 1.0, x, y, vs, 100000, rs);
  const MeanMatrix w = recombine_w(x, y, vs);
  const double oracle = std::log(gb_marginal_dual_r1(1.0, 3.0, vs.vw(), 1.0, q, w, DualForm::kOmega)) -
                        std::log(gb_marginal_dual_r1(1.0, 3.0, vs.vx(), 1.0, q, x, DualForm::kOmega)) +
                        phi_u_log(x, y, vs);
  CHECK(std::abs(est.log_value - oracle) <= 3.0 * est.std_err_log);
}

TEST_CASE("gb_marginal_dual_r1: the two forms agree") {
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{3, 4}, {1, 5}, {2, 3}}) {
    for (double v : {0.2, 0.5, 1.0}) {
      for (double w2 : {0.0, 1.0, 10.0}) {
        const MeanMatrix w = first_entry(15, std::sqrt(w2));
        const double om = gb_marginal_dual_r1(a, b, v, 1.0, 15, w, DualForm::kOmega);
        const double la = gb_marginal_dual_r1(a, b, v, 1.0, 15, w, DualForm::kLambda);
        CHECK(om > 0.0);
        CHECK(std::abs(om - la) <= 1e-6 * om);
      }
    }
  }
  const MeanMatrix zero = MeanMatrix::zeros(Dims(1, 15));
  CHECK(gb_marginal_dual_r1(2, 4, 0.5, 1.0, 15, zero, DualForm::kOmega) ==
        doctest::Approx(gb_marginal_dual_r1(2, 4, 0.5, 1.0, 15, zero, DualForm::kLambda)).epsilon(1e-6));
  CHECK(gb_marginal_dual_r1(2, 4, 1.0, 1.0, 15, first_entry(15, 1.0), DualForm::kOmega) ==
        gb_marginal_dual_r1(2, 4, 1.0, 1.0, 15, first_entry(15, 1.0), DualForm::kLambda));
  CHECK(kind_of([&] { gb_marginal_dual_r1(2, 2, 0.5, 1.0, 15, zero, DualForm::kOmega); }) ==
        ErrorKind::kPreconditionViolated);
}

TEST_CASE("gb_marginal_dual_r1 against Monte Carlo over Omega") {
  // m(W; v) = (2 pi v0)^(-q/2) E_{B(a+q, b)}[g_v] * B(a+q, b) normalizer ratio;
  // the v-free constants cancel in a ratio of two v values.
  const int q = 15;
  const MeanMatrix w = first_entry(q, 1.3);
  const double ratio_quad = gb_marginal_dual_r1(1.0, 3.0, 0.2, 1.0, q, w, DualForm::kOmega) /
                            gb_marginal_dual_r1(1.0, 3.0, 0.7, 1.0, q, w, DualForm::kOmega);
  RandomStream rs(14, 0);
  GbWeightKernel k1(w.entries(), 0.2, 1.0), k2(w.entries(), 0.7, 1.0);
  MatrixBetaSampler sampler(1.0 + q, 3.0, 1);
  std::vector<double> g1, g2;
  for (int i = 0; i < 200000; ++i) {
    const Eigen::MatrixXd& om = sampler.draw(rs);
    g1.push_back(std::exp(k1.log_weight(om)));
    g2.push_back(std::exp(k2.log_weight(om)));
  }
  const double ratio_mc = testing::mean(g1) / testing::mean(g2);
  const double rel_se = std::hypot(testing::std_err(g1) / testing::mean(g1),
                                   testing::std_err(g2) / testing::mean(g2));
  CHECK(std::abs(ratio_mc / ratio_quad - 1.0) <= 3.0 * rel_se);
}

TEST_CASE("posterior_mean_mc examples") {
  RandomStream rs(15, 0);
  const MeanMatrix w(testing::gaussian_matrix(2, 15, rs));
  CHECK(posterior_mean_mc(prior::Uniform{}, w, 0.5, 1000, rs).entries() == w.entries());

  const prior::ConjugateFixedOmega c{0.5, 2.0};
  const double v = 0.8, wv = 1.7;
  const auto est = posterior_mean_mc_detailed(c, scalar(wv), v, 100000, rs);
  const double oracle = c.tau2() / (c.tau2() + v) * wv;
  CHECK(std::abs(est.mean(0, 0) - oracle) <= 3.0 * est.std_err(0, 0));

  const MeanMatrix zero = MeanMatrix::zeros(Dims(2, 15));
  for (const PriorSpec& spec : std::vector<PriorSpec>{prior::JS{}, prior::EM{}, prior::MS1{}}) {
    const auto e = posterior_mean_mc_detailed(spec, zero, 1.0, 100000, rs);
    CHECK((e.mean.entries().array().abs() <= 3.0 * e.std_err.array() + 1e-12).all());
  }
}

TEST_CASE("posterior_mean_mc reports unstable estimates") {
  // A very concentrated conjugate prior far from W starves the weights.
  RandomStream rs(16, 0);
  CHECK(kind_of([&] {
          posterior_mean_mc(prior::ConjugateFixedOmega{0.9999, 1.0}, scalar(30.0), 10.0, 1000, rs);
        }) == ErrorKind::kUnstableEstimate);
}

TEST_CASE("brown_residual") {
  RandomStream rs(17, 0);
  const MeanMatrix w(testing::gaussian_matrix(2, 15, rs));
  CHECK(brown_residual(prior::Uniform{}, w, 1.0, 1000, 1e-3, rs) <= 1e-9);

  // Conjugate: the residual is the self-normalized mean of the affine map
  // o -> (1 + v / tau2) o + v w / tau2, so its error is (1 + v / tau2) times
  // the posterior-mean error.
  const prior::ConjugateFixedOmega c{0.4, 1.0};
  const double v = 0.6, h = 1e-3;
  const RandomStream start(18, 0);
  RandomStream s1 = start, s2 = start;
  const auto pm = posterior_mean_mc_detailed(c, scalar(1.1), v, 100000, s1);
  const double residual = brown_residual(c, scalar(1.1), v, 100000, h, s2);
  CHECK(residual <= 3.0 * (1.0 + v / c.tau2()) * pm.std_err(0, 0) + h * h);

  // EM weights |Theta Theta^T|^-6 degenerate near the pole (ESS ~ 10 of 1e5
  // at ||W|| ~ 8), so W is drawn at a scale where the sampler is usable.
  RandomStream s3(19, 0);
  const MeanMatrix w_em(3.0 * testing::gaussian_matrix(2, 15, s3));
  CHECK(brown_residual(prior::EM{}, w_em, 1.0, 100000, 1e-2, s3) <= 0.05 * w_em.entries().norm());
}
