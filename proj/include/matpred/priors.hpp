#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "matpred/linalg.hpp"
#include "matpred/sampling.hpp"

namespace matpred {

namespace prior {

// pi(Theta) = 1.
struct Uniform {};
// pi(Theta) = ||Theta||^(-beta); beta defaults to qr - 2 (harmonic).
struct JS {
  std::optional<double> beta;
};
// pi(Theta) = |Theta Theta^T|^(-alpha/2); alpha defaults to q - r - 1 (harmonic).
struct EM {
  std::optional<double> alpha;
};
// pi(Theta) = prod_i lambda_i^(-alpha_i/2).
struct ST {
  std::vector<double> alphas;
};
// pi(Theta) = (sum_i lambda_i)^(-beta/2) prod_i lambda_i^(-alpha_i/2).
struct SH {
  std::vector<double> alphas;
  double beta = 0.0;
};
// SH with alpha_i = (q+r-2i-1)/2, beta = 2(r-1).
struct MS1 {};
// SH with alpha_i = q+r-2i-1, beta = 2(r-1).
struct MS2 {};
// Hierarchical prior: Theta | Omega ~ N(0, v0 Omega^-1 (I-Omega) (x) I_q) and
// Omega matrix-beta with density proportional to |Omega|^(a/2-1) |I-Omega|^(b/2-1).
struct GB {
  double a = 1.0;
  double b = 3.0;
  double v0 = 1.0;
};
// Test oracle: Theta ~ N(0, tau2 I (x) I) with tau2 = v0 (1 - omega) / omega,
// i.e. the GB first stage with Omega fixed at omega I. Normalized density.
struct ConjugateFixedOmega {
  double omega = 0.5;
  double v0 = 1.0;

  double tau2() const { return v0 * (1.0 - omega) / omega; }
};

}  // namespace prior

using PriorSpec = std::variant<prior::Uniform, prior::JS, prior::EM, prior::ST, prior::SH,
                               prior::MS1, prior::MS2, prior::GB, prior::ConjugateFixedOmega>;

std::string prior_name(const PriorSpec& spec);
// Parameter summary such as "a=1 b=3 v0=1"; empty for parameter-free priors.
std::string prior_params(const PriorSpec& spec);

// Shrinkage exponents of the superharmonic family.
struct ShParams {
  std::vector<double> alphas;
  double beta = 0.0;
};

// Expands JS, EM, ST, SH, MS1 and MS2 into their (alphas, beta) form.
std::optional<ShParams> sh_params(const PriorSpec& spec, const Dims& dims);

// Throws when the spec is not usable at these dims (kInvalidInput for bad
// parameters, kPreconditionViolated for e.g. JS with qr < 3).
void validate_prior(const PriorSpec& spec, const Dims& dims);

// Log prior density up to an additive constant. +inf at a pole; throws
// kUnsupportedSpec for GB, which has no closed-form Theta density.
double log_prior(const PriorSpec& spec, const MeanMatrix& theta);

// Hot-loop form of log_prior: resolves the spec once and keeps scratch space.
class PriorEvaluator {
 public:
  PriorEvaluator(const PriorSpec& spec, const Dims& dims);

  double log_density(const Eigen::MatrixXd& theta);
  bool is_uniform() const { return kind_ == Kind::kUniform; }

 private:
  enum class Kind { kUniform, kShrinkage, kConjugate };

  void eigenvalues_of_gram(const Eigen::MatrixXd& theta);

  Kind kind_;
  Dims dims_;
  ShParams sh_;
  bool needs_spectrum_ = false;
  bool any_alpha_positive_ = false;
  double conj_tau2_ = 1.0;
  double conj_log_norm_ = 0.0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd lambdas_;
  JacobiEigenSolver eig_;
};

// Laplacian-to-density ratio tr[grad grad^T pi] / pi for the SH family at a
// spectrum lambda_1 >= ... >= lambda_r > 0. Throws kDegenerateSpectrum when a
// pair with alpha_i != alpha_j has lambda_i - lambda_j <= 1e-8 lambda_1.
double sh_laplacian_analytic(const std::vector<double>& alphas, double beta,
                             const Eigen::VectorXd& lambdas, const Dims& dims);

// Central-difference Laplacian of pi divided by pi(Theta).
double laplacian_fd(const PriorSpec& spec, const MeanMatrix& theta, double h);
// Same with the default step 1e-3 * max(1, ||Theta||).
double laplacian_fd(const PriorSpec& spec, const MeanMatrix& theta);

// Raw central-difference Laplacian sum_ij [f(T+he) - 2f(T) + f(T-he)] / h^2.
double fd_laplacian(const std::function<double(const Eigen::MatrixXd&)>& f,
                    const Eigen::MatrixXd& theta, double h);

// True iff alphas has length r, is non-negative and non-increasing, and
// alpha_i <= (q+r-2i-1)/2 (1-based i).
bool check_st_minimax(const std::vector<double>& alphas, const Dims& dims);

enum class GbRegionMode { kMinimax, kAdmissibleMinimax, kUniversal };

std::optional<GbRegionMode> parse_gb_region_mode(const std::string& text);
std::string to_string(GbRegionMode mode);

// (a, b) region tests for the hierarchical prior:
//   minimax:            a > 2-q, b > 2, a+b <= (q-r-1)/(2 - vw/v0) - 2r + 2
//   admissible_minimax: a > 0,   b > 2, same upper bound
//   universal:          a > 0,   b > 2, a+b <= (q-5r+3)/2, needs q-5r-1 > 0
// Throws kPreconditionViolated if q-r-1 <= 0, or if vw >= v0 in the
// v-dependent modes.
bool check_gb_region(double a, double b, const Dims& dims, double v_w, double v_0,
                     GbRegionMode mode);

}  // namespace matpred
