#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "oscint/integrands.hpp"

namespace oscint {

/// Panels used for the reference integral of every sample.
inline constexpr int kTruthPanels = 1 << 13;

struct Sample {
  ParamVector params;
  std::vector<double> inputs;  // f(x_i) at the dataset's fixed abscissae
  double truth = 0.0;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  Family family = Family::Sine;
  Domain domain;
  int n_in = 1;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;
};

struct SplitDataset {
  Dataset train;
  Dataset val;
  Dataset test;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct GenerationOptions {
  /// A draw is rejected when |truth| < resample_factor * (s2 - s1) * max|f|.
  double resample_factor = 1e-2;
  int max_attempts = 10000;
  unsigned workers = 1;
};

/// Midpoint-convention input nodes s1 + (i - 1/2)(s2 - s1)/n_in, i = 1..n_in.
std::vector<double> input_abscissae(Domain domain, int n_in);

/// Trapezoid rule at `panels` panels (2^13 by default) over the spec's domain.
double surrogate_truth(const IntegrandSpec& spec, const ParamVector& params,
                       int panels = kTruthPanels);
double surrogate_truth(const BoundIntegrand& f, int panels = kTruthPanels);

struct TruthRefinement {
  double coarse = 0.0;  // 2^12 panels
  double truth = 0.0;   // 2^13 panels
  double fine = 0.0;    // 2^14 panels

  /// |I(2^13) - I(2^14)| / max(|I(2^14)|, eps)
  double drift() const;
};

/// Computes the three reference values. Throws TruthNotConverged if drift()
/// exceeds `tolerance`; the values are attached to the message.
TruthRefinement truth_refinement_check(const IntegrandSpec& spec, const ParamVector& params,
                                       double tolerance = 1e-6);
TruthRefinement truth_refinement_values(const IntegrandSpec& spec, const ParamVector& params);

/// Parameters, reference integrals and inputs for several input counts, drawn
/// once so that datasets of different n_in share the same functions.
struct ParametricDraws {
  IntegrandSpec spec;
  std::uint64_t seed = 0;
  std::vector<ParamVector> params;
  std::vector<double> truths;
  std::map<int, std::vector<std::vector<double>>> inputs;  // n_in -> per-sample inputs
  std::size_t resampled = 0;
};

ParametricDraws draw_samples(const IntegrandSpec& spec, std::size_t m, std::uint64_t seed,
                             std::span<const int> input_sizes,
                             const GenerationOptions& options = {});

Dataset to_dataset(const ParametricDraws& draws, int n_in);

Dataset build_dataset(const IntegrandSpec& spec, std::size_t m, int n_in, std::uint64_t seed,
                      const GenerationOptions& options = {});
Dataset build_dataset(Family family, std::size_t m, int n_in, Domain domain, std::uint64_t seed);

/// Shuffled partition. Sizes round to nearest for train and val; test takes the rest.
SplitDataset split(const Dataset& dataset, SplitRatios ratios, std::uint64_t seed);

void write_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace oscint
