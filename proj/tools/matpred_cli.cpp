// matpred: risk tables, condition checks, density evaluation and sampling.
//
//   matpred risk experiment.cfg --out results.csv
//   matpred table1 --reps 2000 --inner 2000 --format markdown
//   matpred check --prior gb --a 1 --b 3 --r 2 --q 15 --vw 0.0909 --v0 1
//   matpred density --prior js --vx 1 --vy 1 --x-file x.txt --y-file y.txt
//   matpred sample --dist matbeta --a 3 --b 3 --r 2 --count 5

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "matpred/error.hpp"
#include "matpred/experiment.hpp"
#include "matpred/format.hpp"
#include "matpred/matrix_io.hpp"
#include "matpred/predictive.hpp"
#include "matpred/priors.hpp"
#include "matpred/random_stream.hpp"
#include "matpred/sampling.hpp"

using namespace matpred;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailures = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<long> reps;
  std::optional<long> inner;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

struct PriorOptions {
  std::string name = "uniform";
  std::optional<double> a, b, v0, alpha, beta, omega;
  std::string alphas;

  PriorParams params() const {
    PriorParams p{a, b, v0, alpha, beta, omega, std::nullopt};
    if (!alphas.empty()) p.alphas = parse_double_list(alphas);
    return p;
  }
};

void add_prior_options(CLI::App* cmd, PriorOptions& p) {
  cmd->add_option("--prior", p.name, "uniform|js|em|st|sh|ms1|ms2|gb|conjugate");
  cmd->add_option("--a", p.a);
  cmd->add_option("--b", p.b);
  cmd->add_option("--v0", p.v0);
  cmd->add_option("--alpha", p.alpha);
  cmd->add_option("--beta", p.beta);
  cmd->add_option("--omega", p.omega);
  cmd->add_option("--alphas", p.alphas, "comma-separated list");
}

int run_config(ExperimentConfig config, const GlobalOptions& g) {
  if (g.seed) config.master_seed = *g.seed;
  for (auto& s : config.scenarios) {
    if (g.reps) s.reps = *g.reps;
    if (g.inner) s.inner_n = *g.inner;
  }
  if (g.out) config.output_path = *g.out;
  if (g.format) {
    const auto format = parse_output_format(*g.format);
    if (!format) throw Error(ErrorKind::kConfig, "unknown format '" + *g.format + "'");
    config.format = *format;
  }

  const auto rows = run_experiment(config);
  bool too_many_failures = false;
  for (const auto& row : rows) {
    if (row.error) std::cerr << "scenario failed: " << *row.error << '\n';
    too_many_failures = too_many_failures || row.too_many_failures;
  }
  const std::string report = render_report(rows, config.format);
  if (config.output_path.empty()) {
    std::cout << report;
  } else {
    write_file_atomic(config.output_path, report);
  }
  return too_many_failures ? kExitFailures : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-variate normal predictive densities and risk simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--reps", g.reps, "outer replications per scenario");
  app.add_option("--inner", g.inner, "inner Monte Carlo draws");
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_option("--format", g.format, "csv|markdown");

  std::string config_path;
  auto* risk = app.add_subcommand("risk", "run the scenarios of a config file");
  risk->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  auto* table1 = app.add_subcommand("table1", "hierarchical-prior risk grid");
  auto* table2 = app.add_subcommand("table2", "risk grid across prior families");

  PriorOptions check_prior;
  int check_r = 2, check_q = 15;
  double check_vw = 0.0;
  std::string check_mode = "minimax";
  auto* check = app.add_subcommand("check", "minimaxity condition checks");
  add_prior_options(check, check_prior);
  check->add_option("--r", check_r);
  check->add_option("--q", check_q);
  check->add_option("--vw", check_vw);
  check->add_option("--mode", check_mode, "minimax|admissible_minimax|universal");

  PriorOptions density_prior;
  double density_vx = 1.0, density_vy = 1.0;
  std::string x_file, y_file;
  auto* density = app.add_subcommand("density", "predictive log-density log phi(Y | X)");
  add_prior_options(density, density_prior);
  density->add_option("--vx", density_vx)->required();
  density->add_option("--vy", density_vy)->required();
  density->add_option("--x-file", x_file)->required()->check(CLI::ExistingFile);
  density->add_option("--y-file", y_file)->required()->check(CLI::ExistingFile);

  std::string dist;
  int sample_r = 2, sample_q = 15, count = 1;
  double sample_v = 1.0, df = 0.0, beta_a = 1.0, beta_b = 1.0;
  auto* sample = app.add_subcommand("sample", "draw random matrices");
  sample->add_option("--dist", dist)->required()->check(
      CLI::IsMember({"matnorm", "wishart", "matbeta"}));
  sample->add_option("--r", sample_r);
  sample->add_option("--q", sample_q);
  sample->add_option("--v", sample_v, "matnorm variance");
  sample->add_option("--df", df, "Wishart degrees of freedom");
  sample->add_option("--a", beta_a);
  sample->add_option("--b", beta_b);
  sample->add_option("--count", count);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*risk) return run_config(load_experiment_config(config_path), g);
    if (*table1) return run_config(table1_config(), g);
    if (*table2) return run_config(table2_config(), g);

    if (*check) {
      const Dims dims(check_r, check_q);
      if (check_prior.name == "gb") {
        const auto mode = parse_gb_region_mode(check_mode);
        if (!mode) throw Error(ErrorKind::kConfig, "unknown mode '" + check_mode + "'");
        const bool ok = check_gb_region(check_prior.a.value_or(1.0), check_prior.b.value_or(3.0),
                                        dims, check_vw, check_prior.v0.value_or(1.0), *mode);
        std::cout << to_string(*mode) << '=' << (ok ? "true" : "false") << '\n';
      } else if (check_prior.name == "st") {
        const bool ok = check_st_minimax(parse_double_list(check_prior.alphas), dims);
        std::cout << "minimax=" << (ok ? "true" : "false") << '\n';
      } else {
        throw Error(ErrorKind::kConfig, "check supports --prior gb or st");
      }
      return 0;
    }

    if (*density) {
      const PriorSpec spec = make_prior(density_prior.name, density_prior.params());
      const MeanMatrix x(read_matrix_file(x_file));
      const MeanMatrix y(read_matrix_file(y_file));
      validate_prior(spec, x.dims());
      const VarianceSpec vs(density_vx, density_vy);
      const long n = g.inner.value_or(10000);
      RandomStream stream(g.seed.value_or(0), 0);
      PredictiveEstimate est;
      if (const auto* gb = std::get_if<prior::GB>(&spec)) {
        est = log_phi_gb_mc(gb->a, gb->b, gb->v0, x, y, vs, n, stream);
      } else {
        est = log_phi_pi_mc(spec, x, y, vs, n, stream);
      }
      std::cout << "log_density=" << format_g17(est.log_value)
                << " std_err=" << format_g17(est.std_err_log) << '\n';
      return 0;
    }

    if (*sample) {
      RandomStream stream(g.seed.value_or(0), 0);
      for (int k = 0; k < count; ++k) {
        if (k) std::cout << '\n';
        if (dist == "matnorm") {
          write_matrix(std::cout,
                       sample_matrix_normal(MeanMatrix::zeros(Dims(sample_r, sample_q)), sample_v,
                                            stream).entries());
        } else if (dist == "wishart") {
          write_matrix(std::cout, sample_wishart_identity(df, sample_r, stream).matrix());
        } else {
          write_matrix(std::cout, sample_matrix_beta(beta_a, beta_b, sample_r, stream).matrix());
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "matpred: " << e.what() << '\n';
    if (e.kind() == ErrorKind::kIo) return kExitIo;
    if (e.kind() == ErrorKind::kTooManyFailures) return kExitFailures;
    return kExitConfig;
  }
  return 0;
}
