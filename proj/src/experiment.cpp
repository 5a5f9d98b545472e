#include "matpred/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "matpred/error.hpp"
#include "matpred/format.hpp"

namespace matpred {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size()) {
    throw Error(ErrorKind::kConfig, "bad number for " + key + ": '" + text + "'");
  }
  return value;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  Int value = 0;
  const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size()) {
    throw Error(ErrorKind::kConfig, "bad integer for " + key + ": '" + text + "'");
  }
  return value;
}

std::string join(const std::vector<double>& xs, char sep) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_shortest(xs[i]);
  }
  return out;
}

// Applies one key to a scenario; returns false if the key is not a scenario key.
bool apply_scenario_key(ScenarioDescriptor& s, const std::string& key, const std::string& value) {
  if (key == "r") s.r = parse_integer<int>(value, key);
  else if (key == "q") s.q = parse_integer<int>(value, key);
  else if (key == "vx") s.vx = parse_double(value, key);
  else if (key == "vy") s.vy = parse_double(value, key);
  else if (key == "eigs") s.eigs = parse_double_list(value);
  else if (key == "prior") s.prior = trim(value);
  else if (key == "a") s.params.a = parse_double(value, key);
  else if (key == "b") s.params.b = parse_double(value, key);
  else if (key == "v0") s.params.v0 = parse_double(value, key);
  else if (key == "alpha") s.params.alpha = parse_double(value, key);
  else if (key == "beta") s.params.beta = parse_double(value, key);
  else if (key == "omega") s.params.omega = parse_double(value, key);
  else if (key == "alphas") s.params.alphas = parse_double_list(value);
  else if (key == "reps") s.reps = parse_integer<long>(value, key);
  else if (key == "inner") s.inner_n = parse_integer<long>(value, key);
  else return false;
  return true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> row_fields(const ReportRow& row) {
  const ScenarioDescriptor& s = row.scenario;
  return {std::to_string(s.r),
          std::to_string(s.q),
          format_g17(s.vx),
          format_g17(s.vy),
          join(s.eigs, ';'),
          s.prior,
          row.prior_params,
          std::to_string(s.reps),
          std::to_string(s.inner_n),
          std::to_string(row.seed),
          format_g17(row.risk),
          format_g17(row.std_err),
          format_g17(row.minimax_const),
          row.error ? "error" : (row.exceeds_minimax ? "true" : "false")};
}

ExperimentConfig grid_config(const std::vector<std::pair<std::string, PriorParams>>& priors,
                             const std::vector<std::vector<double>>& eig_grid) {
  const std::pair<double, double> variances[] = {{0.1, 1.0}, {1.0, 1.0}, {1.0, 0.1}};
  ExperimentConfig config;
  for (const auto& [vx, vy] : variances) {
    for (const auto& eigs : eig_grid) {
      for (const auto& [name, params] : priors) {
        ScenarioDescriptor s;
        s.r = 2;
        s.q = 15;
        s.vx = vx;
        s.vy = vy;
        s.eigs = eigs;
        s.prior = name;
        s.params = params;
        config.scenarios.push_back(s);
      }
    }
  }
  return config;
}

PriorParams gb_params(double a, double b) {
  PriorParams p;
  p.a = a;
  p.b = b;
  p.v0 = 1.0;
  return p;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_double(token, "list"));
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || c == ' ' || c == '\t') flush();
    else token += c;
  }
  flush();
  return out;
}

PriorSpec make_prior(const std::string& name, const PriorParams& p) {
  auto require_alphas = [&]() -> const std::vector<double>& {
    if (!p.alphas) throw Error(ErrorKind::kConfig, "prior " + name + " needs alphas");
    return *p.alphas;
  };
  if (name == "uniform") return prior::Uniform{};
  if (name == "js") return prior::JS{p.beta};
  if (name == "em") return prior::EM{p.alpha};
  if (name == "st") return prior::ST{require_alphas()};
  if (name == "sh") return prior::SH{require_alphas(), p.beta.value_or(0.0)};
  if (name == "ms1") return prior::MS1{};
  if (name == "ms2") return prior::MS2{};
  if (name == "gb") return prior::GB{p.a.value_or(1.0), p.b.value_or(3.0), p.v0.value_or(1.0)};
  if (name == "conjugate") {
    if (!p.omega) throw Error(ErrorKind::kConfig, "prior conjugate needs omega");
    return prior::ConjugateFixedOmega{*p.omega, p.v0.value_or(1.0)};
  }
  throw Error(ErrorKind::kConfig, "unknown prior '" + name + "'");
}

std::optional<OutputFormat> parse_output_format(const std::string& text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "markdown" || text == "md") return OutputFormat::kMarkdown;
  return std::nullopt;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  ScenarioDescriptor defaults;
  bool in_scenario = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[scenario]") {
      config.scenarios.push_back(defaults);
      in_scenario = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    ScenarioDescriptor& target = in_scenario ? config.scenarios.back() : defaults;
    if (key == "seed") {
      const auto seed = parse_integer<std::uint64_t>(value, key);
      if (in_scenario) target.seed = seed;
      else config.master_seed = seed;
    } else if (!in_scenario && key == "output") {
      config.output_path = value;
    } else if (!in_scenario && key == "format") {
      const auto format = parse_output_format(value);
      if (!format) throw Error(ErrorKind::kConfig, "unknown format '" + value + "'");
      config.format = *format;
    } else if (!apply_scenario_key(target, key, value)) {
      throw Error(ErrorKind::kConfig,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config " + path);
  return parse_experiment_config(in);
}

ExperimentConfig table1_config() {
  std::vector<std::pair<std::string, PriorParams>> priors;
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{
           {-11, 3}, {-11, 9}, {-11, 15}, {-5, 3}, {-5, 9}, {1, 3}}) {
    priors.emplace_back("gb", gb_params(a, b));
  }
  return grid_config(priors, {{0, 0}, {24, 0}, {24, 24}});
}

ExperimentConfig table2_config() {
  const std::vector<std::pair<std::string, PriorParams>> priors = {
      {"gb", gb_params(1, 3)}, {"js", {}}, {"em", {}}, {"ms1", {}}, {"ms2", {}}};
  return grid_config(priors, {{0, 0}, {24, 0}, {24, 4}, {24, 8}, {24, 12}, {24, 24}});
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
  std::vector<ReportRow> rows;
  rows.reserve(config.scenarios.size());
  for (const ScenarioDescriptor& s : config.scenarios) {
    ReportRow row;
    row.scenario = s;
    row.seed = s.seed.value_or(config.master_seed);
    row.risk = kNaN;
    row.std_err = kNaN;
    row.minimax_const = kNaN;
    try {
      const PriorSpec prior = make_prior(s.prior, s.params);
      row.prior_params = prior_params(prior);
      RiskScenario scenario{Dims(s.r, s.q), VarianceSpec(s.vx, s.vy), s.eigs, prior,
                            s.reps, s.inner_n, row.seed};
      row.minimax_const = minimax_risk(scenario.dims, scenario.vs);
      const McEstimate est = kl_risk_mc(scenario);
      row.risk = est.value;
      row.std_err = est.std_err;
      row.exceeds_minimax = est.value - 3.0 * est.std_err > row.minimax_const;
    } catch (const Error& e) {
      row.error = e.what();
      row.too_many_failures = e.kind() == ErrorKind::kTooManyFailures;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_report(const std::vector<ReportRow>& rows, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::kCsv) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
      const auto fields = row_fields(row);
      for (size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
      out << '\n';
    }
    return out.str();
  }
  std::istringstream header(kCsvHeader);
  std::string column;
  std::string rule = "|";
  out << "|";
  while (std::getline(header, column, ',')) {
    out << ' ' << column << " |";
    rule += "---|";
  }
  out << '\n' << rule << '\n';
  for (const auto& row : rows) {
    out << "|";
    for (const auto& f : row_fields(row)) out << ' ' << f << " |";
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename " + tmp + " to " + path);
  }
}

}  // namespace matpred
