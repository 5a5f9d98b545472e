#include "matpred/risk.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "matpred/error.hpp"
#include "matpred/estimators.hpp"

namespace matpred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ReplicationResult {
  double loss = 0.0;
  double bias_bound = 0.0;
  bool failed = false;
};

// Everything one replication needs, resolved once per scenario.
struct ReplicationContext {
  const RiskScenario& scenario;
  MeanMatrix theta;
  const prior::GB* gb;
  bool uniform;
};

ReplicationContext make_context(const RiskScenario& s) {
  if (s.outer_reps < 2) throw Error(ErrorKind::kInvalidInput, "outer_reps must be >= 2");
  validate_prior(s.prior, s.dims);
  const auto* gb = std::get_if<prior::GB>(&s.prior);
  const bool uniform = std::holds_alternative<prior::Uniform>(s.prior);
  if (!uniform && s.inner_n < 2) throw Error(ErrorKind::kInvalidInput, "inner_n must be >= 2");
  if (gb) {
    if (gb->v0 < s.vs.vx()) {
      throw Error(ErrorKind::kPreconditionViolated, "hierarchical prior requires v0 >= v_x");
    }
    if (!(gb->a + s.dims.q() > 0.0) || !(gb->b > 0.0)) {
      throw Error(ErrorKind::kInvalidShape, "hierarchical prior needs a + q > 0 and b > 0");
    }
  }
  MeanMatrix theta = s.theta ? *s.theta : build_theta(s.eigs, s.dims);
  if (!(theta.dims() == s.dims)) throw Error(ErrorKind::kDimensionMismatch, "theta does not match dims");
  return {s, std::move(theta), gb, uniform};
}

PredictiveEstimate inner_estimate(const ReplicationContext& ctx, const MeanMatrix& x,
                                  const MeanMatrix& y, RandomStream& inner) {
  const RiskScenario& s = ctx.scenario;
  if (ctx.gb) {
    return log_phi_gb_mc(ctx.gb->a, ctx.gb->b, ctx.gb->v0, x, y, s.vs, s.inner_n, inner);
  }
  return log_phi_pi_mc(s.prior, x, y, s.vs, s.inner_n, inner);
}

ReplicationResult run_replication(const ReplicationContext& ctx, long index) {
  const RiskScenario& s = ctx.scenario;
  RandomStream stream(s.master_seed, static_cast<std::uint64_t>(index));
  const MeanMatrix x = sample_matrix_normal(ctx.theta, s.vs.vx(), stream);
  const MeanMatrix y = sample_matrix_normal(ctx.theta, s.vs.vy(), stream);
  const double log_truth = log_matnorm_density(y, ctx.theta, s.vs.vy());
  if (ctx.uniform) return {log_truth - phi_u_log(x, y, s.vs), 0.0, false};

  for (std::uint64_t attempt = 1; attempt <= 2; ++attempt) {
    RandomStream inner = stream.split(attempt);
    try {
      const PredictiveEstimate est = inner_estimate(ctx, x, y, inner);
      if (std::isfinite(est.log_value)) return {log_truth - est.log_value, est.bias_bound, false};
    } catch (const Error&) {
      // Retried once on the next substream, then counted as a failure.
    }
  }
  return {0.0, 0.0, true};
}

// Index-ordered reduction shared by the parallel and serial paths.
McEstimate reduce(const std::vector<ReplicationResult>& results, std::uint64_t seed,
                  bool fold_bias) {
  long ok = 0, failures = 0;
  double sum = 0.0, bias_sum = 0.0;
  for (const auto& r : results) {
    if (r.failed) {
      ++failures;
      continue;
    }
    ++ok;
    sum += r.loss;
    bias_sum += r.bias_bound;
  }
  const long total = static_cast<long>(results.size());
  if (failures > kMaxFailureFraction * static_cast<double>(total) || ok < 2) {
    throw Error(ErrorKind::kTooManyFailures, std::to_string(failures) + " of " +
                                                 std::to_string(total) +
                                                 " replications failed");
  }
  const double mean = sum / static_cast<double>(ok);
  double ss = 0.0;
  for (const auto& r : results) {
    if (!r.failed) ss += (r.loss - mean) * (r.loss - mean);
  }
  const double n = static_cast<double>(ok);
  const double sampling_se = std::sqrt(ss / (n - 1.0) / n);
  const double bias = bias_sum / n;
  McEstimate out;
  out.value = mean;
  out.std_err = fold_bias ? std::hypot(sampling_se, bias) : sampling_se;
  out.n = ok;
  out.master_seed = seed;
  out.inner_bias_bound = bias;
  out.failures = failures;
  return out;
}

template <class Body>
void parallel_indexed(long count, int num_threads, Body&& body) {
  const int threads = num_threads > 0 ? num_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (long i = 0; i < count; ++i) body(i);
}

}  // namespace

MeanMatrix build_theta(const std::vector<double>& eigs, const Dims& dims) {
  if (eigs.size() != static_cast<size_t>(dims.r())) {
    throw Error(ErrorKind::kInvalidInput, "need exactly r eigenvalues");
  }
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(dims.r(), dims.q());
  for (int i = 0; i < dims.r(); ++i) {
    const double e = eigs[static_cast<size_t>(i)];
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw Error(ErrorKind::kInvalidInput, "eigenvalues must be finite and >= 0");
    }
    if (i > 0 && e > eigs[static_cast<size_t>(i - 1)]) {
      throw Error(ErrorKind::kInvalidInput, "eigenvalues must be non-increasing");
    }
    theta(i, i) = std::sqrt(e);
  }
  return MeanMatrix(std::move(theta));
}

double minimax_risk(const Dims& dims, const VarianceSpec& vs) {
  return 0.5 * dims.size() * std::log(vs.vs() / vs.vy());
}

McEstimate kl_risk_mc(const RiskScenario& scenario, int num_threads) {
  const ReplicationContext ctx = make_context(scenario);
  std::vector<ReplicationResult> results(static_cast<size_t>(scenario.outer_reps));
  parallel_indexed(scenario.outer_reps, num_threads,
                   [&](long i) { results[static_cast<size_t>(i)] = run_replication(ctx, i); });
  return reduce(results, scenario.master_seed, true);
}

McEstimate kl_risk_mc_serial(const RiskScenario& scenario) {
  const ReplicationContext ctx = make_context(scenario);
  std::vector<ReplicationResult> results;
  results.reserve(static_cast<size_t>(scenario.outer_reps));
  for (long i = 0; i < scenario.outer_reps; ++i) results.push_back(run_replication(ctx, i));
  return reduce(results, scenario.master_seed, true);
}

MeanMatrix apply_estimator(const PointEstimator& est, const MeanMatrix& x, double v_x) {
  if (std::holds_alternative<estimator::Identity>(est)) return x;
  if (std::holds_alternative<estimator::EfronMorris>(est)) return em_estimate(x, v_x);
  if (std::holds_alternative<estimator::JamesStein>(est)) return js_estimate(x, v_x);
  const auto& ms = std::get<estimator::Matricial>(est);
  return ms_estimate(x, v_x, ms.alphas, ms.beta);
}

McEstimate quad_risk_mc(const PointEstimator& est, const MeanMatrix& theta, double v_x, long reps,
                        std::uint64_t master_seed, int num_threads) {
  if (reps < 2) throw Error(ErrorKind::kInvalidInput, "reps must be >= 2");
  if (!(v_x > 0.0)) throw Error(ErrorKind::kInvalidInput, "v_x must be > 0");
  // Surface precondition errors (e.g. q < r + 2 for Efron-Morris) up front.
  {
    RandomStream probe(master_seed, 0);
    (void)apply_estimator(est, sample_matrix_normal(theta, v_x, probe), v_x);
  }
  std::vector<ReplicationResult> results(static_cast<size_t>(reps));
  parallel_indexed(reps, num_threads, [&](long i) {
    RandomStream stream(master_seed, static_cast<std::uint64_t>(i));
    const MeanMatrix x = sample_matrix_normal(theta, v_x, stream);
    try {
      const double loss = (apply_estimator(est, x, v_x).entries() - theta.entries()).squaredNorm();
      results[static_cast<size_t>(i)] = {loss, 0.0, false};
    } catch (const Error&) {
      results[static_cast<size_t>(i)] = {0.0, 0.0, true};
    }
  });
  return reduce(results, master_seed, false);
}

McEstimate divergence_fd(const PriorSpec& spec, const MeanMatrix& w, double v, long inner_n,
                         double h, std::uint64_t master_seed) {
  if (!(v > 0.0) || !(h > 0.0)) throw Error(ErrorKind::kInvalidInput, "v and h must be > 0");
  if (inner_n < 2) throw Error(ErrorKind::kInvalidInput, "inner_n must be >= 2");
  const int r = w.rows();
  const int q = w.cols();
  const int stencil = 1 + 2 * r * q;

  // Stencil point 0 is W; 1 + 2k and 2 + 2k are W +/- h e_k, k row-major.
  std::vector<Eigen::MatrixXd> points(static_cast<size_t>(stencil), w.entries());
  for (int k = 0; k < r * q; ++k) {
    points[static_cast<size_t>(1 + 2 * k)](k / q, k % q) += h;
    points[static_cast<size_t>(2 + 2 * k)](k / q, k % q) -= h;
  }

  Eigen::MatrixXd logs(inner_n, stencil);
  RandomStream stream(master_seed, 0);
  if (const auto* gb = std::get_if<prior::GB>(&spec)) {
    if (v > gb->v0) throw Error(ErrorKind::kPreconditionViolated, "GB marginal needs v <= v0");
    MatrixBetaSampler sampler(gb->a + q, gb->b, r);
    std::vector<GbWeightKernel> kernels;
    kernels.reserve(static_cast<size_t>(stencil));
    for (const auto& p : points) kernels.emplace_back(p, v, gb->v0);
    for (long k = 0; k < inner_n; ++k) {
      const Eigen::MatrixXd& omega = sampler.draw(stream);
      for (int s = 0; s < stencil; ++s) logs(k, s) = kernels[static_cast<size_t>(s)].log_weight(omega);
    }
  } else {
    PriorEvaluator prior(spec, w.dims());
    Eigen::MatrixXd noise, theta;
    for (long k = 0; k < inner_n; ++k) {
      sample_matrix_normal_into(Eigen::MatrixXd::Zero(r, q), v, stream, noise);
      for (int s = 0; s < stencil; ++s) {
        theta = points[static_cast<size_t>(s)] + noise;
        logs(k, s) = prior.log_density(theta);
      }
    }
  }

  // Drop draws that hit a pole anywhere on the stencil.
  std::vector<long> rows;
  double shift = -kInf;
  for (long k = 0; k < inner_n; ++k) {
    if ((logs.row(k).array() == kInf).any()) continue;
    rows.push_back(k);
    shift = std::max(shift, logs.row(k).maxCoeff());
  }
  const long n = static_cast<long>(rows.size());
  if (n < 2 || shift == -kInf) {
    throw Error(ErrorKind::kDegenerateEstimate, "marginal vanished on the stencil");
  }
  Eigen::MatrixXd vals(n, stencil);
  for (long i = 0; i < n; ++i) vals.row(i) = (logs.row(rows[static_cast<size_t>(i)]).array() - shift).exp();
  const Eigen::RowVectorXd means = vals.colwise().mean();

  const double m0 = means(0);
  const double h2 = h * h;
  double value = 0.0;
  Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(stencil);
  for (int k = 0; k < r * q; ++k) {
    const double mp = means(1 + 2 * k);
    const double mm = means(2 + 2 * k);
    const double p = mp / m0;
    const double m = mm / m0;
    value += 2.0 * (p - 2.0 + m) / h2 - (p - m) * (p - m) / (4.0 * h2);
    const double d_plus = (2.0 / h2 - (p - m) / (2.0 * h2)) / m0;
    const double d_minus = (2.0 / h2 + (p - m) / (2.0 * h2)) / m0;
    grad(1 + 2 * k) += d_plus;
    grad(2 + 2 * k) += d_minus;
    // Each term is homogeneous of degree 0 in (m0, m+, m-).
    grad(0) -= (mp * d_plus + mm * d_minus) / m0;
  }
  const Eigen::VectorXd influence = (vals.rowwise() - means) * grad.transpose();
  const double nd = static_cast<double>(n);

  McEstimate out;
  out.value = value;
  out.std_err = std::sqrt(influence.squaredNorm() / (nd - 1.0) / nd);
  out.n = n;
  out.master_seed = master_seed;
  out.failures = inner_n - n;
  return out;
}

McEstimate stein_residual(const MeanMatrix& theta, double v, long n, std::uint64_t master_seed,
                          const SteinTestFunction& g) {
  if (!(v > 0.0)) throw Error(ErrorKind::kInvalidInput, "v must be > 0");
  if (n < 2) throw Error(ErrorKind::kInvalidInput, "n must be >= 2");
  const double r = theta.rows();
  const double q = theta.cols();
  const auto* constant = std::get_if<stein::Constant>(&g);
  if (constant && (constant->theta0.rows() != theta.rows() || constant->theta0.cols() != theta.cols())) {
    throw Error(ErrorKind::kDimensionMismatch, "Theta0 must match Theta");
  }

  RandomStream stream(master_seed, 0);
  Eigen::MatrixXd w;
  std::vector<double> diffs(static_cast<size_t>(n));
  for (long k = 0; k < n; ++k) {
    sample_matrix_normal_into(theta.entries(), v, stream, w);
    const Eigen::MatrixXd resid = w - theta.entries();
    double lhs = 0.0, div = 0.0;
    if (std::holds_alternative<stein::Linear>(g)) {
      lhs = (resid * w.transpose()).trace();
      div = q * r;
    } else if (constant) {
      lhs = (resid * constant->theta0.transpose()).trace();
      div = 0.0;
    } else {
      const Eigen::MatrixXd gram = w * w.transpose();
      lhs = (resid * w.transpose() * gram).trace();
      div = (q + r + 1.0) * gram.trace();
    }
    diffs[static_cast<size_t>(k)] = lhs - v * div;
  }
  double sum = 0.0;
  for (double d : diffs) sum += d;
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);

  McEstimate out;
  out.value = std::abs(mean);
  out.std_err = std::sqrt(ss / (nd - 1.0) / nd);
  out.n = n;
  out.master_seed = master_seed;
  return out;
}

}  // namespace matpred
