#pragma once

#include <Eigen/Dense>

#include "matpred/linalg.hpp"
#include "matpred/priors.hpp"
#include "matpred/random_stream.hpp"
#include "matpred/sampling.hpp"

namespace matpred {

// Known variances of X and Y, with v_s = v_x + v_y and
// v_w = (1/v_x + 1/v_y)^-1.
class VarianceSpec {
 public:
  VarianceSpec(double v_x, double v_y);

  double vx() const { return v_x_; }
  double vy() const { return v_y_; }
  double vs() const { return v_x_ + v_y_; }
  double vw() const { return 1.0 / (1.0 / v_x_ + 1.0 / v_y_); }

 private:
  double v_x_;
  double v_y_;
};

struct LogDensityEstimate {
  double log_value = 0.0;
  double std_err_log = 0.0;
  long n_inner = 0;
};

// Ratio-form predictive log density log phi = log m(W; v_w) - log m(X; v_x)
// + log phi_U, with its components kept so the sum can be audited.
struct PredictiveEstimate {
  double log_value = 0.0;
  double std_err_log = 0.0;
  long n_inner = 0;
  double log_marginal_ratio = 0.0;
  double log_phi_u = 0.0;
  // First-order bias bound of the log-ratio: (se_num^2 + se_den^2) / 2.
  double bias_bound = 0.0;
};

double phi_u_log(const MeanMatrix& x, const MeanMatrix& y, const VarianceSpec& vs);

MeanMatrix recombine_w(const MeanMatrix& x, const MeanMatrix& y, const VarianceSpec& vs);

// m(Z; v) = E[pi(Theta)], Theta ~ N(Z, v I (x) I), by plain Monte Carlo.
LogDensityEstimate marginal_mc(const PriorSpec& spec, const MeanMatrix& z, double v, long n,
                               RandomStream& stream);

// Numerator uses stream.split(0), denominator stream.split(1).
PredictiveEstimate log_phi_pi_mc(const PriorSpec& spec, const MeanMatrix& x,
                                 const MeanMatrix& y, const VarianceSpec& vs, long n,
                                 RandomStream& stream);

// log g_v(Omega | Z) = -(q/2) log|I - (1 - v/v0) Omega|
//                      - tr[Omega (I - (1 - v/v0) Omega)^-1 Z Z^T] / (2 v0).
double gb_weight(const SymMatrix& omega, const MeanMatrix& z, double v, double v0);

// Allocation-free evaluator of log g_v(Omega | Z) for a fixed Z.
class GbWeightKernel {
 public:
  GbWeightKernel(const Eigen::MatrixXd& z, double v, double v0);

  double log_weight(const Eigen::MatrixXd& omega);

 private:
  Eigen::MatrixXd zzt_;
  double shrink_;  // 1 - v / v0
  double half_q_;
  double inv_two_v0_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd solved_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Hierarchical-prior predictive density. Draws Omega ~ B(a+q, b) once per
// inner sample and reuses it for numerator and denominator.
PredictiveEstimate log_phi_gb_mc(double a, double b, double v0, const MeanMatrix& x,
                                 const MeanMatrix& y, const VarianceSpec& vs, long n,
                                 RandomStream& stream);

enum class DualForm { kOmega, kLambda };

// Hierarchical marginal m(W) at r = 1 (normalizer K_{a,b} omitted) by
// adaptive quadrature over (0, 1), in either the Omega parameterization or
// the transformed Lambda parameterization. Requires a + q > 2, b > 2.
double gb_marginal_dual_r1(double a, double b, double v, double v0, int q,
                           const MeanMatrix& w, DualForm form);

inline constexpr double kDualQuadratureTolerance = 1e-8;

struct PosteriorMeanEstimate {
  MeanMatrix mean;
  Eigen::MatrixXd std_err;
  double effective_sample_size = 0.0;
};

// Self-normalized importance estimate of E[Theta | W] with proposal
// N(W, v I (x) I) and weights pi(Theta). Draws come in antithetic pairs
// W +/- sqrt(v) G. Throws kUnstableEstimate when the effective sample size
// falls below 10.
PosteriorMeanEstimate posterior_mean_mc_detailed(const PriorSpec& spec, const MeanMatrix& w,
                                                 double v, long n, RandomStream& stream);

MeanMatrix posterior_mean_mc(const PriorSpec& spec, const MeanMatrix& w, double v, long n,
                             RandomStream& stream);

// || E[Theta | W] - W - v grad log m(W; v) ||, with the gradient taken by
// central differences of the Monte Carlo marginal on the same draws.
double brown_residual(const PriorSpec& spec, const MeanMatrix& w, double v, long n, double h,
                      RandomStream& stream);

}  // namespace matpred
