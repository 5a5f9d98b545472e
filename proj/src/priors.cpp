#include "matpred/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "matpred/error.hpp"
#include "matpred/format.hpp"

namespace matpred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPoleEigenvalue = 1e-300;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_shortest(xs[i]);
  }
  return out;
}

std::vector<double> st_alphas(const Dims& dims, double scale) {
  std::vector<double> alphas(static_cast<size_t>(dims.r()));
  for (int i = 1; i <= dims.r(); ++i) {
    alphas[static_cast<size_t>(i - 1)] = scale * (dims.q() + dims.r() - 2 * i - 1);
  }
  return alphas;
}

}  // namespace

std::string prior_name(const PriorSpec& spec) {
  return std::visit(Overloaded{
                        [](const prior::Uniform&) { return std::string("uniform"); },
                        [](const prior::JS&) { return std::string("js"); },
                        [](const prior::EM&) { return std::string("em"); },
                        [](const prior::ST&) { return std::string("st"); },
                        [](const prior::SH&) { return std::string("sh"); },
                        [](const prior::MS1&) { return std::string("ms1"); },
                        [](const prior::MS2&) { return std::string("ms2"); },
                        [](const prior::GB&) { return std::string("gb"); },
                        [](const prior::ConjugateFixedOmega&) { return std::string("conjugate"); },
                    },
                    spec);
}

std::string prior_params(const PriorSpec& spec) {
  return std::visit(
      Overloaded{
          [](const prior::Uniform&) { return std::string(); },
          [](const prior::JS& p) {
            return p.beta ? "beta=" + format_shortest(*p.beta) : std::string();
          },
          [](const prior::EM& p) {
            return p.alpha ? "alpha=" + format_shortest(*p.alpha) : std::string();
          },
          [](const prior::ST& p) { return "alphas=" + join(p.alphas); },
          [](const prior::SH& p) {
            return "alphas=" + join(p.alphas) + " beta=" + format_shortest(p.beta);
          },
          [](const prior::MS1&) { return std::string(); },
          [](const prior::MS2&) { return std::string(); },
          [](const prior::GB& p) {
            return "a=" + format_shortest(p.a) + " b=" + format_shortest(p.b) +
                   " v0=" + format_shortest(p.v0);
          },
          [](const prior::ConjugateFixedOmega& p) {
            return "omega=" + format_shortest(p.omega) + " v0=" + format_shortest(p.v0);
          },
      },
      spec);
}

std::optional<ShParams> sh_params(const PriorSpec& spec, const Dims& dims) {
  const auto r = static_cast<size_t>(dims.r());
  return std::visit(
      Overloaded{
          [&](const prior::JS& p) -> std::optional<ShParams> {
            return ShParams{std::vector<double>(r, 0.0),
                            p.beta.value_or(static_cast<double>(dims.size() - 2))};
          },
          [&](const prior::EM& p) -> std::optional<ShParams> {
            const double alpha = p.alpha.value_or(dims.q() - dims.r() - 1.0);
            return ShParams{std::vector<double>(r, alpha), 0.0};
          },
          [&](const prior::ST& p) -> std::optional<ShParams> { return ShParams{p.alphas, 0.0}; },
          [&](const prior::SH& p) -> std::optional<ShParams> {
            return ShParams{p.alphas, p.beta};
          },
          [&](const prior::MS1&) -> std::optional<ShParams> {
            return ShParams{st_alphas(dims, 0.5), 2.0 * (dims.r() - 1)};
          },
          [&](const prior::MS2&) -> std::optional<ShParams> {
            return ShParams{st_alphas(dims, 1.0), 2.0 * (dims.r() - 1)};
          },
          [](const auto&) -> std::optional<ShParams> { return std::nullopt; },
      },
      spec);
}

void validate_prior(const PriorSpec& spec, const Dims& dims) {
  if (const auto* js = std::get_if<prior::JS>(&spec)) {
    if (dims.size() < 3) {
      throw Error(ErrorKind::kPreconditionViolated, "JS prior requires qr >= 3");
    }
    if (js->beta && !(*js->beta >= 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "JS beta must be >= 0");
    }
  }
  if (const auto* gb = std::get_if<prior::GB>(&spec)) {
    if (!(gb->v0 > 0.0) || !std::isfinite(gb->a) || !std::isfinite(gb->b)) {
      throw Error(ErrorKind::kInvalidInput, "GB prior needs finite a, b and v0 > 0");
    }
    return;
  }
  if (const auto* c = std::get_if<prior::ConjugateFixedOmega>(&spec)) {
    if (!(c->omega > 0.0 && c->omega < 1.0) || !(c->v0 > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "conjugate prior needs omega in (0,1) and v0 > 0");
    }
    return;
  }
  if (const auto sh = sh_params(spec, dims)) {
    if (sh->alphas.size() != static_cast<size_t>(dims.r())) {
      throw Error(ErrorKind::kInvalidInput, "alphas must have length r");
    }
    for (double a : sh->alphas) {
      if (!(a >= 0.0)) throw Error(ErrorKind::kInvalidInput, "alphas must be >= 0");
    }
    if (!(sh->beta >= 0.0)) throw Error(ErrorKind::kInvalidInput, "beta must be >= 0");
  }
}

PriorEvaluator::PriorEvaluator(const PriorSpec& spec, const Dims& dims) : dims_(dims) {
  validate_prior(spec, dims);
  if (std::holds_alternative<prior::Uniform>(spec)) {
    kind_ = Kind::kUniform;
  } else if (const auto* c = std::get_if<prior::ConjugateFixedOmega>(&spec)) {
    kind_ = Kind::kConjugate;
    conj_tau2_ = c->tau2();
    conj_log_norm_ = -0.5 * dims.size() * std::log(2.0 * std::numbers::pi * conj_tau2_);
  } else if (auto sh = sh_params(spec, dims)) {
    kind_ = Kind::kShrinkage;
    sh_ = std::move(*sh);
    for (double a : sh_.alphas) {
      if (a != 0.0) needs_spectrum_ = true;
      if (a > 0.0) any_alpha_positive_ = true;
    }
  } else {
    throw Error(ErrorKind::kUnsupportedSpec,
                "prior '" + prior_name(spec) + "' has no pointwise Theta density");
  }
}

void PriorEvaluator::eigenvalues_of_gram(const Eigen::MatrixXd& theta) {
  gram_.noalias() = theta * theta.transpose();
  const int r = dims_.r();
  lambdas_.resize(r);
  if (r == 1) {
    lambdas_(0) = gram_(0, 0);
  } else if (r == 2) {
    const double half_tr = 0.5 * (gram_(0, 0) + gram_(1, 1));
    const double half_diff = 0.5 * (gram_(0, 0) - gram_(1, 1));
    const double top = half_tr + std::hypot(half_diff, gram_(0, 1));
    const double det = gram_(0, 0) * gram_(1, 1) - gram_(0, 1) * gram_(0, 1);
    lambdas_(0) = top;
    lambdas_(1) = top > 0.0 ? det / top : 0.0;
  } else {
    eig_.compute(gram_, false);
    lambdas_ = eig_.values();
  }
}

double PriorEvaluator::log_density(const Eigen::MatrixXd& theta) {
  switch (kind_) {
    case Kind::kUniform:
      return 0.0;
    case Kind::kConjugate:
      return conj_log_norm_ - theta.squaredNorm() / (2.0 * conj_tau2_);
    case Kind::kShrinkage:
      break;
  }
  double out = 0.0;
  if (sh_.beta != 0.0) {
    const double trace = theta.squaredNorm();
    if (trace == 0.0) return sh_.beta > 0.0 ? kInf : -kInf;
    out -= 0.5 * sh_.beta * std::log(trace);
  }
  if (!needs_spectrum_) return out;
  eigenvalues_of_gram(theta);
  if (any_alpha_positive_ && lambdas_(dims_.r() - 1) < kPoleEigenvalue) return kInf;
  for (int i = 0; i < dims_.r(); ++i) {
    const double alpha = sh_.alphas[static_cast<size_t>(i)];
    if (alpha != 0.0) out -= 0.5 * alpha * std::log(lambdas_(i));
  }
  return out;
}

double log_prior(const PriorSpec& spec, const MeanMatrix& theta) {
  PriorEvaluator evaluator(spec, theta.dims());
  return evaluator.log_density(theta.entries());
}

double sh_laplacian_analytic(const std::vector<double>& alphas, double beta,
                             const Eigen::VectorXd& lambdas, const Dims& dims) {
  const int r = dims.r();
  const int q = dims.q();
  if (alphas.size() != static_cast<size_t>(r) || lambdas.size() != r) {
    throw Error(ErrorKind::kDimensionMismatch, "alphas and lambdas must have length r");
  }
  for (int i = 0; i < r; ++i) {
    if (!(lambdas(i) > 0.0)) throw Error(ErrorKind::kInvalidInput, "lambdas must be > 0");
    if (i > 0 && lambdas(i) > lambdas(i - 1)) {
      throw Error(ErrorKind::kInvalidInput, "lambdas must be non-increasing");
    }
  }
  const double gap_floor = 1e-8 * lambdas(0);
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      if (alphas[i] != alphas[j] && lambdas(i) - lambdas(j) <= gap_floor) {
        throw Error(ErrorKind::kDegenerateSpectrum,
                    "eigenvalues " + std::to_string(i) + "," + std::to_string(j) +
                        " coincide while their exponents differ");
      }
    }
  }

  const double trace = lambdas.sum();
  double out = (beta * beta - (static_cast<double>(q) * r - 2.0) * beta) / trace;
  for (int i = 0; i < r; ++i) {
    const double a = alphas[static_cast<size_t>(i)];
    out += (a * a - (q - r - 1.0) * a) / lambdas(i);
    for (int j = i + 1; j < r; ++j) {
      const double diff = a - alphas[static_cast<size_t>(j)];
      if (diff != 0.0) out -= 2.0 * diff / (lambdas(i) - lambdas(j));
    }
    out += 2.0 * a * beta / trace;
  }
  return out;
}

double fd_laplacian(const std::function<double(const Eigen::MatrixXd&)>& f,
                    const Eigen::MatrixXd& theta, double h) {
  const double center = f(theta);
  Eigen::MatrixXd probe = theta;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
      probe(i, j) = theta(i, j) + h;
      const double plus = f(probe);
      probe(i, j) = theta(i, j) - h;
      const double minus = f(probe);
      probe(i, j) = theta(i, j);
      sum += (plus - 2.0 * center + minus) / (h * h);
    }
  }
  return sum;
}

double laplacian_fd(const PriorSpec& spec, const MeanMatrix& theta, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidInput, "step must be > 0");
  PriorEvaluator evaluator(spec, theta.dims());
  if (evaluator.is_uniform()) return 0.0;
  const double center = evaluator.log_density(theta.entries());
  if (!std::isfinite(center)) throw Error(ErrorKind::kPoleInStencil, "pole at stencil center");
  Eigen::MatrixXd probe = theta.entries();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    for (Eigen::Index j = 0; j < probe.cols(); ++j) {
      const double base = probe(i, j);
      probe(i, j) = base + h;
      const double plus = evaluator.log_density(probe);
      probe(i, j) = base - h;
      const double minus = evaluator.log_density(probe);
      probe(i, j) = base;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw Error(ErrorKind::kPoleInStencil, "pole inside finite-difference stencil");
      }
      // (pi(+) - 2 pi(0) + pi(-)) / pi(0), evaluated from log ratios.
      sum += (std::expm1(plus - center) + std::expm1(minus - center)) / (h * h);
    }
  }
  return sum;
}

double laplacian_fd(const PriorSpec& spec, const MeanMatrix& theta) {
  return laplacian_fd(spec, theta, 1e-3 * std::max(1.0, theta.entries().norm()));
}

bool check_st_minimax(const std::vector<double>& alphas, const Dims& dims) {
  if (alphas.size() != static_cast<size_t>(dims.r())) return false;
  for (int i = 1; i <= dims.r(); ++i) {
    const double a = alphas[static_cast<size_t>(i - 1)];
    if (!(a >= 0.0)) return false;
    if (i > 1 && a > alphas[static_cast<size_t>(i - 2)]) return false;
    if (a > 0.5 * (dims.q() + dims.r() - 2 * i - 1)) return false;
  }
  return true;
}

std::optional<GbRegionMode> parse_gb_region_mode(const std::string& text) {
  if (text == "minimax") return GbRegionMode::kMinimax;
  if (text == "admissible_minimax") return GbRegionMode::kAdmissibleMinimax;
  if (text == "universal") return GbRegionMode::kUniversal;
  return std::nullopt;
}

std::string to_string(GbRegionMode mode) {
  switch (mode) {
    case GbRegionMode::kMinimax: return "minimax";
    case GbRegionMode::kAdmissibleMinimax: return "admissible_minimax";
    case GbRegionMode::kUniversal: return "universal";
  }
  return "unknown";
}

bool check_gb_region(double a, double b, const Dims& dims, double v_w, double v_0,
                     GbRegionMode mode) {
  const double r = dims.r();
  const double q = dims.q();
  if (!(q - r - 1.0 > 0.0)) {
    throw Error(ErrorKind::kPreconditionViolated, "region checks need q - r - 1 > 0");
  }
  if (mode == GbRegionMode::kUniversal) {
    if (!(q - 5.0 * r - 1.0 > 0.0)) return false;
    return a > 0.0 && b > 2.0 && a + b <= (q - 5.0 * r + 3.0) / 2.0;
  }
  if (!(v_w > 0.0) || !(v_0 > 0.0) || !(v_w < v_0)) {
    throw Error(ErrorKind::kPreconditionViolated, "region checks need 0 < v_w < v_0");
  }
  const double upper = (q - r - 1.0) / (2.0 - v_w / v_0) - 2.0 * r + 2.0;
  const double a_floor = mode == GbRegionMode::kMinimax ? 2.0 - q : 0.0;
  return a > a_floor && b > 2.0 && a + b <= upper;
}

}  // namespace matpred
