#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "matpred/predictive.hpp"
#include "matpred/priors.hpp"
#include "matpred/sampling.hpp"

namespace matpred {

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
  long n = 0;
  std::uint64_t master_seed = 0;
  // Mean first-order bias bound of the inner log-ratio estimates; already
  // folded into std_err by kl_risk_mc.
  double inner_bias_bound = 0.0;
  long failures = 0;
};

// One risk-table cell. `eigs` lists the eigenvalues of Theta Theta^T in
// non-increasing order (length r).
struct RiskScenario {
  Dims dims{2, 15};
  VarianceSpec vs{1.0, 1.0};
  std::vector<double> eigs;
  PriorSpec prior = prior::Uniform{};
  long outer_reps = 10000;
  long inner_n = 10000;
  std::uint64_t master_seed = 0;
  // When set, used instead of build_theta(eigs, dims).
  std::optional<MeanMatrix> theta;
};

// Canonical representative [diag(sqrt(eigs)) | 0] with Theta Theta^T = diag(eigs).
MeanMatrix build_theta(const std::vector<double>& eigs, const Dims& dims);

// Constant risk (qr/2) log(v_s / v_y) of the best invariant density.
double minimax_risk(const Dims& dims, const VarianceSpec& vs);

// Fraction of replications allowed to fail before kl_risk_mc gives up.
inline constexpr double kMaxFailureFraction = 1e-3;

// Monte Carlo KL risk. Replication i draws X and Y from
// RandomStream(master_seed, i); inner estimators use that stream's split(1),
// and split(2) on the single retry. Replications run under OpenMP
// (num_threads = 0 keeps the runtime default) and are reduced in index order,
// so the result does not depend on the thread count.
McEstimate kl_risk_mc(const RiskScenario& scenario, int num_threads = 0);

// Single-threaded reference implementation; bit-identical to kl_risk_mc.
McEstimate kl_risk_mc_serial(const RiskScenario& scenario);

namespace estimator {
struct Identity {};
struct EfronMorris {};
struct JamesStein {};
struct Matricial {
  std::vector<double> alphas;
  double beta = 0.0;
};
}  // namespace estimator

using PointEstimator = std::variant<estimator::Identity, estimator::EfronMorris,
                                    estimator::JamesStein, estimator::Matricial>;

MeanMatrix apply_estimator(const PointEstimator& est, const MeanMatrix& x, double v_x);

// Mean of ||estimate(X) - Theta||^2 over reps draws X ~ N(Theta, v_x I (x) I).
McEstimate quad_risk_mc(const PointEstimator& est, const MeanMatrix& theta, double v_x, long reps,
                        std::uint64_t master_seed, int num_threads = 0);

// Monte Carlo estimate of
//   2 tr[grad grad^T m(W; v)] / m - ||grad m(W; v)||^2 / m^2
// by central differences of the marginal with common random numbers across
// all stencil points. Error by the delta method over the inner draws. GB
// specs use the Omega-mixture form of the marginal (needs v <= v0).
McEstimate divergence_fd(const PriorSpec& spec, const MeanMatrix& w, double v, long inner_n,
                         double h, std::uint64_t master_seed);

namespace stein {
// G(W) = W^T; tr grad G = qr.
struct Linear {};
// G(W) = Theta0^T, constant; tr grad G = 0.
struct Constant {
  Eigen::MatrixXd theta0;
};
// G(W) = W^T W W^T; tr grad G = (q + r + 1) tr(W W^T).
struct Cubic {};
}  // namespace stein

using SteinTestFunction = std::variant<stein::Linear, stein::Constant, stein::Cubic>;

// |E tr[(W - Theta) G(W)] - v E tr[grad_W G(W)]| with W ~ N(Theta, v I (x) I).
McEstimate stein_residual(const MeanMatrix& theta, double v, long n, std::uint64_t master_seed,
                          const SteinTestFunction& g = stein::Linear{});

}  // namespace matpred
