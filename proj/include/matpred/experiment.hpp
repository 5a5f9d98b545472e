#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "matpred/priors.hpp"
#include "matpred/risk.hpp"

namespace matpred {

// Optional parameters accepted by make_prior. Unused ones are ignored.
struct PriorParams {
  std::optional<double> a, b, v0, alpha, beta, omega;
  std::optional<std::vector<double>> alphas;
};

// Builds a prior from its short name (uniform, js, em, st, sh, ms1, ms2, gb,
// conjugate). Unknown names or missing required parameters throw kConfig.
PriorSpec make_prior(const std::string& name, const PriorParams& params);

std::vector<double> parse_double_list(const std::string& text);

// Unvalidated scenario as written in a config; turned into a RiskScenario
// at run time so one bad scenario does not stop the rest.
struct ScenarioDescriptor {
  int r = 2;
  int q = 15;
  double vx = 1.0;
  double vy = 1.0;
  std::vector<double> eigs;
  std::string prior = "uniform";
  PriorParams params;
  long reps = 10000;
  long inner_n = 10000;
  std::optional<std::uint64_t> seed;
};

enum class OutputFormat { kCsv, kMarkdown };

std::optional<OutputFormat> parse_output_format(const std::string& text);

struct ExperimentConfig {
  std::vector<ScenarioDescriptor> scenarios;
  std::uint64_t master_seed = 0;
  std::string output_path;  // empty: standard output
  OutputFormat format = OutputFormat::kCsv;
};

// Flat "key = value" text. Keys before the first [scenario] line set the
// run (seed, output, format) and defaults for every scenario (reps, inner,
// r, q, ...); keys inside a block apply to that scenario only. '#' starts a
// comment. Syntax errors throw kConfig.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

// Desk-scale grids of the two published risk tables.
ExperimentConfig table1_config();
ExperimentConfig table2_config();

struct ReportRow {
  ScenarioDescriptor scenario;
  std::string prior_params;
  std::uint64_t seed = 0;
  double risk = 0.0;
  double std_err = 0.0;
  double minimax_const = 0.0;
  bool exceeds_minimax = false;
  std::optional<std::string> error;
  bool too_many_failures = false;
};

inline constexpr const char* kCsvHeader =
    "r,q,vx,vy,eigs,prior,params,reps,inner_n,seed,risk,std_err,minimax_const,exceeds_minimax";

// One row per scenario, in config order. A scenario that fails validation
// or aborts produces a row with risk = std_err = nan and exceeds_minimax =
// "error". exceeds_minimax is true when risk - 3 std_err exceeds the constant.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

std::string render_report(const std::vector<ReportRow>& rows, OutputFormat format);

// Writes through a temporary file in the same directory and renames it into
// place. Throws kIo on failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace matpred
