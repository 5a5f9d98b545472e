#include "matpred/predictive.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "matpred/error.hpp"
#include "matpred/log_mean_exp.hpp"

namespace matpred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::kInvalidInput, std::string(what) + " must be positive and finite");
  }
}

void require_inner_count(long n) {
  if (n < 2) throw Error(ErrorKind::kInvalidInput, "inner sample count must be >= 2");
}

LogDensityEstimate finish(const LogMeanExp& acc) {
  if (acc.degenerate()) {
    throw Error(ErrorKind::kDegenerateEstimate, "no finite positive prior weight among draws");
  }
  return {acc.log_mean(), acc.std_err_log(), acc.count()};
}

}  // namespace

VarianceSpec::VarianceSpec(double v_x, double v_y) : v_x_(v_x), v_y_(v_y) {
  require_positive(v_x, "v_x");
  require_positive(v_y, "v_y");
}

double phi_u_log(const MeanMatrix& x, const MeanMatrix& y, const VarianceSpec& vs) {
  return log_matnorm_density(y, x, vs.vs());
}

MeanMatrix recombine_w(const MeanMatrix& x, const MeanMatrix& y, const VarianceSpec& vs) {
  require_same_dims(x, y);
  return MeanMatrix(vs.vw() * (x.entries() / vs.vx() + y.entries() / vs.vy()));
}

LogDensityEstimate marginal_mc(const PriorSpec& spec, const MeanMatrix& z, double v, long n,
                               RandomStream& stream) {
  require_positive(v, "v");
  require_inner_count(n);
  PriorEvaluator prior(spec, z.dims());
  if (prior.is_uniform()) return {0.0, 0.0, n};
  LogMeanExp acc;
  Eigen::MatrixXd theta;
  for (long i = 0; i < n; ++i) {
    sample_matrix_normal_into(z.entries(), v, stream, theta);
    acc.add(prior.log_density(theta));
  }
  return finish(acc);
}

PredictiveEstimate log_phi_pi_mc(const PriorSpec& spec, const MeanMatrix& x,
                                 const MeanMatrix& y, const VarianceSpec& vs, long n,
                                 RandomStream& stream) {
  require_same_dims(x, y);
  if (std::holds_alternative<prior::GB>(spec)) {
    throw Error(ErrorKind::kUnsupportedSpec, "use log_phi_gb_mc for the hierarchical prior");
  }
  const MeanMatrix w = recombine_w(x, y, vs);
  RandomStream numerator_stream = stream.split(0);
  RandomStream denominator_stream = stream.split(1);
  const LogDensityEstimate num = marginal_mc(spec, w, vs.vw(), n, numerator_stream);
  const LogDensityEstimate den = marginal_mc(spec, x, vs.vx(), n, denominator_stream);

  PredictiveEstimate out;
  out.log_marginal_ratio = num.log_value - den.log_value;
  out.log_phi_u = phi_u_log(x, y, vs);
  out.log_value = out.log_marginal_ratio + out.log_phi_u;
  out.std_err_log = std::hypot(num.std_err_log, den.std_err_log);
  out.n_inner = n;
  out.bias_bound = 0.5 * (num.std_err_log * num.std_err_log + den.std_err_log * den.std_err_log);
  return out;
}

GbWeightKernel::GbWeightKernel(const Eigen::MatrixXd& z, double v, double v0)
    : zzt_(z * z.transpose()),
      shrink_(1.0 - v / v0),
      half_q_(0.5 * static_cast<double>(z.cols())),
      inv_two_v0_(0.5 / v0),
      m_(z.rows(), z.rows()),
      solved_(z.rows(), z.rows()),
      llt_(z.rows()) {}

double GbWeightKernel::log_weight(const Eigen::MatrixXd& omega) {
  m_ = -shrink_ * omega;
  m_.diagonal().array() += 1.0;
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotPositiveDefinite, "I - (1 - v/v0) Omega is not positive definite");
  }
  double log_det = 0.0;
  const auto& l = llt_.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  // Omega and M commute, so M^-1 Omega is the symmetric matrix in the trace.
  solved_ = llt_.solve(omega);
  const double trace = (solved_.array() * zzt_.array()).sum();
  return -half_q_ * log_det - trace * inv_two_v0_;
}

double gb_weight(const SymMatrix& omega, const MeanMatrix& z, double v, double v0) {
  require_positive(v, "v");
  require_positive(v0, "v0");
  if (v > v0) throw Error(ErrorKind::kInvalidInput, "g_v needs v <= v0");
  if (omega.order() != z.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "Omega order must equal rows of Z");
  }
  const EigenPair eig = sym_eig(omega);
  if (!(eig.values(eig.values.size() - 1) > 0.0) || !(eig.values(0) < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "Omega eigenvalues must lie in (0, 1)");
  }
  GbWeightKernel kernel(z.entries(), v, v0);
  return kernel.log_weight(omega.matrix());
}

PredictiveEstimate log_phi_gb_mc(double a, double b, double v0, const MeanMatrix& x,
                                 const MeanMatrix& y, const VarianceSpec& vs, long n,
                                 RandomStream& stream) {
  require_same_dims(x, y);
  require_inner_count(n);
  require_positive(v0, "v0");
  if (v0 < vs.vx()) {
    throw Error(ErrorKind::kPreconditionViolated, "hierarchical prior requires v0 >= v_x");
  }
  const int q = x.cols();
  MatrixBetaSampler sampler(a + q, b, x.rows());
  const MeanMatrix w = recombine_w(x, y, vs);
  GbWeightKernel numerator(w.entries(), vs.vw(), v0);
  GbWeightKernel denominator(x.entries(), vs.vx(), v0);

  std::vector<double> log_num(static_cast<size_t>(n));
  std::vector<double> log_den(static_cast<size_t>(n));
  double max_num = -kInf;
  double max_den = -kInf;
  for (long j = 0; j < n; ++j) {
    const Eigen::MatrixXd& omega = sampler.draw(stream);
    log_num[j] = numerator.log_weight(omega);
    log_den[j] = denominator.log_weight(omega);
    max_num = std::max(max_num, log_num[j]);
    max_den = std::max(max_den, log_den[j]);
  }

  const double nd = static_cast<double>(n);
  double sum_num = 0.0, sum_den = 0.0;
  for (long j = 0; j < n; ++j) {
    sum_num += std::exp(log_num[j] - max_num);
    sum_den += std::exp(log_den[j] - max_den);
  }
  const double mean_num = sum_num / nd;
  const double mean_den = sum_den / nd;
  // Paired delta method on log(mean_num / mean_den).
  double ss_pair = 0.0, ss_num = 0.0, ss_den = 0.0;
  for (long j = 0; j < n; ++j) {
    const double rn = std::exp(log_num[j] - max_num) / mean_num - 1.0;
    const double rd = std::exp(log_den[j] - max_den) / mean_den - 1.0;
    ss_pair += (rn - rd) * (rn - rd);
    ss_num += rn * rn;
    ss_den += rd * rd;
  }
  const double denom = nd * (nd - 1.0);

  PredictiveEstimate out;
  out.log_marginal_ratio = (max_num + std::log(mean_num)) - (max_den + std::log(mean_den));
  out.log_phi_u = phi_u_log(x, y, vs);
  out.log_value = out.log_marginal_ratio + out.log_phi_u;
  out.std_err_log = std::sqrt(ss_pair / denom);
  out.n_inner = n;
  out.bias_bound = 0.5 * (ss_num + ss_den) / denom;
  return out;
}

double gb_marginal_dual_r1(double a, double b, double v, double v0, int q, const MeanMatrix& w,
                           DualForm form) {
  if (w.rows() != 1 || w.cols() != q) {
    throw Error(ErrorKind::kDimensionMismatch, "dual marginal is defined for a 1 x q matrix");
  }
  if (!(a + q > 2.0) || !(b > 2.0)) {
    throw Error(ErrorKind::kPreconditionViolated, "dual marginal needs a + q > 2 and b > 2");
  }
  require_positive(v, "v");
  require_positive(v0, "v0");
  if (v > v0) throw Error(ErrorKind::kPreconditionViolated, "dual marginal needs v <= v0");

  const double v1 = v / v0;
  const double half_q = 0.5 * q;
  const double w2 = w.entries().squaredNorm();
  const double log_front = -half_q * std::log(2.0 * std::numbers::pi * v);
  const double log_v1 = std::log(v1);

  auto omega_form = [=](double omega) {
    const double log_lambda = log_v1 + std::log(omega) - std::log1p(-(1.0 - v1) * omega);
    const double lambda = std::exp(log_lambda);
    return std::exp(log_front + half_q * log_lambda + (0.5 * a - 1.0) * std::log(omega) +
                    (0.5 * b - 1.0) * std::log1p(-omega) - lambda * w2 / (2.0 * v));
  };
  auto lambda_form = [=](double lambda) {
    const double log_d = std::log(v1 + (1.0 - v1) * lambda);
    const double log_omega = std::log(lambda) - log_d;
    const double log_one_minus_omega = log_v1 + std::log1p(-lambda) - log_d;
    // Jacobian v1 (v1 + (1 - v1) lambda)^-2 of the map Lambda -> Omega.
    return std::exp(log_front + half_q * std::log(lambda) + log_v1 - 2.0 * log_d +
                    (0.5 * a - 1.0) * log_omega + (0.5 * b - 1.0) * log_one_minus_omega -
                    lambda * w2 / (2.0 * v));
  };

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  double error = 0.0;
  if (form == DualForm::kOmega) {
    return Quadrature::integrate(omega_form, 0.0, 1.0, 25, kDualQuadratureTolerance, &error);
  }
  return Quadrature::integrate(lambda_form, 0.0, 1.0, 25, kDualQuadratureTolerance, &error);
}

PosteriorMeanEstimate posterior_mean_mc_detailed(const PriorSpec& spec, const MeanMatrix& w,
                                                 double v, long n, RandomStream& stream) {
  require_positive(v, "v");
  require_inner_count(n);
  PriorEvaluator prior(spec, w.dims());
  const double sd = std::sqrt(v);
  const long pairs = (n + 1) / 2;

  std::vector<Eigen::MatrixXd> offsets(static_cast<size_t>(pairs));
  std::vector<double> log_plus(static_cast<size_t>(pairs));
  std::vector<double> log_minus(static_cast<size_t>(pairs), -kInf);
  double shift = -kInf;
  Eigen::MatrixXd theta;
  for (long k = 0; k < pairs; ++k) {
    Eigen::MatrixXd& offset = offsets[static_cast<size_t>(k)];
    sample_matrix_normal_into(Eigen::MatrixXd::Zero(w.rows(), w.cols()), 1.0, stream, offset);
    offset *= sd;
    theta = w.entries() + offset;
    log_plus[k] = prior.log_density(theta);
    if (2 * k + 1 < n) {
      theta = w.entries() - offset;
      log_minus[k] = prior.log_density(theta);
    }
    // Pole draws carry no usable weight.
    if (log_plus[k] == kInf) log_plus[k] = -kInf;
    if (log_minus[k] == kInf) log_minus[k] = -kInf;
    shift = std::max({shift, log_plus[k], log_minus[k]});
  }
  if (shift == -kInf) {
    throw Error(ErrorKind::kDegenerateEstimate, "no finite positive prior weight among draws");
  }

  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  double sum_w = 0.0, sum_w2 = 0.0;
  std::vector<double> pair_weight(static_cast<size_t>(pairs));
  for (long k = 0; k < pairs; ++k) {
    const double wp = std::exp(log_plus[k] - shift);
    const double wm = std::exp(log_minus[k] - shift);
    weighted += (wp - wm) * offsets[static_cast<size_t>(k)];
    sum_w += wp + wm;
    sum_w2 += wp * wp + wm * wm;
    pair_weight[k] = wp + wm;
  }
  const double ess = sum_w * sum_w / sum_w2;
  if (ess < 10.0) {
    throw Error(ErrorKind::kUnstableEstimate,
                "effective sample size " + std::to_string(ess) + " below 10");
  }
  const Eigen::MatrixXd mean_offset = weighted / sum_w;

  // Ratio-estimator variance with antithetic pairs as the iid units.
  Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (long k = 0; k < pairs; ++k) {
    const double wp = std::exp(log_plus[k] - shift);
    const double wm = std::exp(log_minus[k] - shift);
    const Eigen::MatrixXd resid =
        (wp - wm) * offsets[static_cast<size_t>(k)] - pair_weight[k] * mean_offset;
    ss.array() += resid.array().square();
  }

  return {MeanMatrix(w.entries() + mean_offset), ss.array().sqrt() / sum_w, ess};
}

MeanMatrix posterior_mean_mc(const PriorSpec& spec, const MeanMatrix& w, double v, long n,
                             RandomStream& stream) {
  return posterior_mean_mc_detailed(spec, w, v, n, stream).mean;
}

double brown_residual(const PriorSpec& spec, const MeanMatrix& w, double v, long n, double h,
                      RandomStream& stream) {
  require_positive(h, "h");
  // Snapshot the stream so the stencil below replays the posterior-mean draws.
  const RandomStream start = stream;
  const MeanMatrix posterior = posterior_mean_mc(spec, w, v, n, stream);

  PriorEvaluator prior(spec, w.dims());
  const double sd = std::sqrt(v);
  const long pairs = (n + 1) / 2;
  auto log_marginal_at = [&](const Eigen::MatrixXd& center) {
    RandomStream replay = start;
    LogMeanExp acc;
    Eigen::MatrixXd offset, theta;
    for (long k = 0; k < pairs; ++k) {
      sample_matrix_normal_into(Eigen::MatrixXd::Zero(w.rows(), w.cols()), 1.0, replay, offset);
      offset *= sd;
      theta = center + offset;
      acc.add(prior.log_density(theta));
      if (2 * k + 1 < n) {
        theta = center - offset;
        acc.add(prior.log_density(theta));
      }
    }
    if (acc.degenerate()) {
      throw Error(ErrorKind::kDegenerateEstimate, "marginal vanished on stencil");
    }
    return acc.log_mean();
  };

  Eigen::MatrixXd grad(w.rows(), w.cols());
  Eigen::MatrixXd probe = w.entries();
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      const double base = probe(i, j);
      probe(i, j) = base + h;
      const double plus = log_marginal_at(probe);
      probe(i, j) = base - h;
      const double minus = log_marginal_at(probe);
      probe(i, j) = base;
      grad(i, j) = (plus - minus) / (2.0 * h);
    }
  }
  return (posterior.entries() - w.entries() - v * grad).norm();
}

}  // namespace matpred
