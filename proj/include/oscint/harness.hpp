#pragma once

/**
 * Experiment orchestration: paired classical/network sweeps over the number of
 * quadrature points, the architecture grid search, the per-family FLOP-gain
 * table and the oscillatoriness sweep.
 *
 * Every random choice is derived from ExperimentConfig::seed, so a config and
 * a seed determine every emitted byte regardless of the worker count.
 */

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "oscint/dataset.hpp"
#include "oscint/metrics.hpp"
#include "oscint/mlp.hpp"

namespace oscint {

struct ExperimentConfig {
  Family family = Family::Sine;
  std::optional<ParamSpace> param_space;  // family default when empty
  Domain domain;
  RpConfig rp;
  double resample_factor = 1e-2;

  std::vector<int> n_q_sweep;     // classical rules; 2^0..2^13
  std::vector<int> nn_n_q_sweep;  // network input counts; 2^0..2^6
  std::vector<int> hidden_layers_grid{1, 2, 3, 4, 5};
  std::vector<int> neurons_grid{1, 2, 3, 4, 5, 6, 7};
  std::vector<std::size_t> samples_grid{100, 1000, 10000};
  std::vector<double> learning_rate_grid{1e-5, 1e-4, 1e-3};
  std::vector<double> val_fraction_grid{0.1, 0.15, 0.2};
  /// Oscillatoriness levels; empty means 5 log-spaced points from the
  /// family's lowest bound to 4x its highest.
  std::vector<double> oscillatoriness_grid;

  Architecture arch{16, 3, 5};  // n_in is used by train/search only
  std::size_t samples = 10000;
  std::size_t rp_samples = 1000;
  double val_fraction = 0.1;  // test fraction is the same
  TrainConfig train;
  double target_nmse = 1e-3;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::filesystem::path output_dir = "out";

  ExperimentConfig();

  IntegrandSpec spec() const;
  IntegrandSpec spec_for(Family family) const;
  std::size_t samples_for(Family family) const;
  SplitRatios ratios() const;
};

void validate(const ExperimentConfig& cfg);

/// Reads a TOML file with optional sections [family], [domain], [sweep],
/// [train] and [rp]; missing keys keep their defaults. OSCINT_WORKERS, when
/// set, overrides the worker count.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_toml(std::string_view text, const std::string& source = "<string>");
void apply_env_overrides(ExperimentConfig& cfg);

struct SweepRow {
  Family family = Family::Sine;
  Method method = Method::NeuralNet;
  int n_q = 0;
  int hidden_layers = 0;
  int neurons = 0;
  std::uint64_t flops_paper = 0;
  std::uint64_t flops_exact = 0;
  double train_nmse = 0.0;
  double val_nmse = 0.0;
  double test_nmse = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

using SweepReport = std::vector<SweepRow>;

/// Family, method, n_q, hidden layers, neurons.
void sort_report(SweepReport& report);

/// Parameters and splits shared by the classical and network sweeps of one
/// family, so both are scored on the same test functions.
struct ExperimentData {
  IntegrandSpec spec;
  std::uint64_t data_seed = 0;
  ParametricDraws draws;
  SplitRatios ratios;
  std::uint64_t split_seed = 0;

  SplitDataset splits(int n_in) const;
};

ExperimentData prepare_data(const ExperimentConfig& cfg, const IntegrandSpec& spec,
                            std::size_t samples, std::span<const int> input_sizes);

SweepReport run_quadrature_sweep(const ExperimentConfig& cfg, const ExperimentData& data);
SweepReport run_nn_sweep(const ExperimentConfig& cfg, const ExperimentData& data);
SweepReport run_quadrature_sweep(const ExperimentConfig& cfg);
SweepReport run_nn_sweep(const ExperimentConfig& cfg);
/// Both sweeps on one shared dataset, sorted.
SweepReport run_sweep(const ExperimentConfig& cfg);

struct SearchRow {
  SweepRow row;
  double learning_rate = 0.0;
  std::size_t samples = 0;
  double val_fraction = 0.0;
  bool feasible = false;
};

struct SearchResult {
  Architecture best;
  double learning_rate = 0.0;
  std::size_t samples = 0;
  double val_fraction = 0.0;
  double best_val_nmse = 0.0;
  /// False when no cell reached the target; `best` is then the lowest
  /// validation NMSE found.
  bool feasible = false;
  std::vector<SearchRow> table;
};

/// Trains every cell of hidden_layers x neurons x learning_rate x samples x
/// val_fraction at n_in = cfg.arch.n_in. Among cells whose validation NMSE
/// meets the target it picks the fewest paper-mode FLOPs, then the lowest
/// validation NMSE.
SearchResult hyperparameter_search(const ExperimentConfig& cfg);
/// Same, but throws NoFeasibleArch when nothing meets the target.
SearchResult hyperparameter_search_strict(const ExperimentConfig& cfg);

/// Curves over n_q built from sweep rows (test NMSE, paper-mode FLOPs).
/// Rows with a non-ok status or non-finite NMSE are skipped.
std::vector<MethodCurve> curves_from_report(const SweepReport& report, Family family);

struct Table2Row {
  Family family = Family::Sine;
  double target_nmse = 1e-3;
  std::uint64_t flops_nn = 0;
  std::uint64_t flops_qm = 0;
  std::optional<Method> best_rule;
  double alpha = 0.0;
  double gain = 0.0;
  double paper_alpha = 0.0;
  std::string status = "ok";
};

double paper_alpha(Family family);

struct Table2Result {
  std::vector<Table2Row> rows;
  SweepReport report;
};

/// Both sweeps for each family, then alpha at cfg.target_nmse. A family whose
/// curves miss the target is recorded with status "target_unreachable".
Table2Result reproduce_table2(const ExperimentConfig& cfg,
                              std::span<const Family> families = kAllFamilies);

struct OscillatorinessPoint {
  double parameter = 0.0;
  std::uint64_t flops_nn = 0;
  std::uint64_t flops_qm = 0;
  double alpha = 0.0;
  std::string status = "ok";
};

std::vector<double> default_oscillatoriness_grid(Family family);

/// One paired sweep per level. Level p scales the family's parameter space by
/// p / (lowest bound of its first parameter), so the lowest bound becomes p.
std::vector<OscillatorinessPoint> alpha_vs_oscillatoriness(const ExperimentConfig& cfg, Family family,
                                                           std::span<const double> grid,
                                                           double target_nmse);

void emit_report(const SweepReport& report, const std::filesystem::path& path);
std::string format_report(const SweepReport& report);
SweepReport parse_report(const std::filesystem::path& path);
SweepReport parse_report_text(std::string_view text, const std::string& source = "<string>");

void emit_search_table(const SearchResult& result, const std::filesystem::path& path);
void emit_table2(std::span<const Table2Row> rows, const std::filesystem::path& path);
void emit_oscillatoriness(std::span<const OscillatorinessPoint> points, const std::filesystem::path& path);

/// Command-line entry point; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oscint
