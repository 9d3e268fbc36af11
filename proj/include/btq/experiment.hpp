#pragma once

// Experiment runner behind the `btq` command line tool: flat key = value
// configuration in, CSV rows plus a JSON summary out.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btq/analysis.hpp"
#include "btq/toeplitz.hpp"

namespace btq {

enum class ExperimentKind {
  gram_check,
  bergman_density,
  kernel_diagonal,
  trace_expansion,
  product_trace,
  product_residual,
  commutator,
  norm_convergence,
  distances,
  laplace_bound,
  model_kernel,
  exact_structure,
  invariants,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);
/// Experiments whose verdict comes from a rate fit (p values must be >= 8).
bool is_rate_experiment(ExperimentKind kind);

enum class ModeChoice { automatic, slope, monotone };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::gram_check;
  std::vector<std::string> symbols;
  std::vector<int> p_list;
  QuadSpec quad;
  std::optional<double> target_exponent;  // nullopt: from the symbol class
  double tolerance = kDefaultSlopeTolerance;
  ModeChoice mode = ModeChoice::automatic;
  std::string out_path;
  std::uint64_t seed = 0;
  int orientation = 1;
  int order = 0;                          // product_residual expansion order
  std::optional<double> coherent_margin;  // norm_convergence: bound C/p
  int model_n = 1;                        // model_kernel
  std::vector<double> model_a;
};

/// Throws ConfigError on unknown keys, bad values or inconsistent settings.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class Verdict { pass, fail, not_applicable };
std::string_view to_string(Verdict v);

struct ReportRow {
  std::string experiment;
  std::string symbols;
  int p = 0;
  int n_t = 0;
  int n_phi = 0;
  double residual = 0.0;
  double reference = 0.0;
  std::optional<double> slope;
  Verdict verdict = Verdict::not_applicable;
};

struct FitSummary {
  std::string series;
  std::optional<RateFit> fit;  // empty when too few levels were run
  bool passed = true;
};

struct Report {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  std::vector<FitSummary> fits;
  double wall_seconds = 0.0;

  bool passed() const;
};

/// Runs the experiment.  NumericFault messages name (experiment, symbols, p).
Report run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader =
    "experiment,symbols,p,n_t,n_phi,residual,reference,slope,verdict";

/// Shortest round-trip-safe rendering with 17 significant digits, no locale.
std::string format_real(double v);
void write_csv(const std::vector<ReportRow>& rows, std::ostream& out);
std::string summary_json(const std::vector<Report>& reports);

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2, kExitNumeric = 3 };

/// Runs `config`, writes `out_path` (CSV) and its .json sibling.
int run(const ExperimentConfig& config, std::ostream& diag);
int run_file(const std::filesystem::path& config_path, std::ostream& diag);

struct SuiteEntry {
  std::string group;  // output file stem
  ExperimentConfig config;
  bool expect_failure = false;  // mutation checks
};

std::vector<SuiteEntry> suite_entries(std::string_view name);
int run_suite(std::string_view name, const std::filesystem::path& out_dir, std::ostream& diag);

}  // namespace btq
