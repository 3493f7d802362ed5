#pragma once

/**
 * Fully connected feed-forward regressor: H ReLU layers of N neurons and a
 * linear scalar output.
 *
 * Inputs are z-scored per feature and the target is divided by the RMS of the
 * training truths before the network sees them; forward() undoes both so
 * callers always work in raw units.
 */

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oscint/dataset.hpp"

namespace oscint {

struct Architecture {
  int n_in = 1;
  int hidden_layers = 1;
  int neurons = 1;

  bool operator==(const Architecture&) const = default;
};

/// Row-major weights (rows = outputs, cols = inputs) and one bias per row.
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& w(int r, int c) { return weights[static_cast<std::size_t>(r) * cols + c]; }
  double w(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const DenseLayer&) const = default;
};

struct MlpNetwork {
  Architecture arch;
  std::vector<DenseLayer> layers;  // hidden_layers ReLU layers, then the 1 x N output
  std::vector<double> input_mean;
  std::vector<double> input_std;
  double target_scale = 1.0;

  std::size_t parameter_count() const;
  bool operator==(const MlpNetwork&) const = default;
};

/// Glorot-uniform weights, zero biases, identity scalers.
MlpNetwork init(const Architecture& arch, std::uint64_t seed);

/// Raw inputs in, raw integral estimate out.
double forward(const MlpNetwork& net, std::span<const double> inputs);

/// Network output for inputs that are already scaled; no target rescaling.
double forward_scaled(const MlpNetwork& net, std::span<const double> scaled_inputs);

std::vector<double> predict(const MlpNetwork& net, const Dataset& data);

/// Scaled inputs (row-major, rows x n_in) with scaled targets.
struct BatchView {
  std::span<const double> inputs;
  std::span<const double> targets;
};

using Gradients = std::vector<DenseLayer>;

/// Mean squared error of forward_scaled over the batch.
double scaled_loss(const MlpNetwork& net, BatchView batch);

/// Reverse-mode gradient of scaled_loss with respect to every weight and bias.
Gradients gradient(const MlpNetwork& net, BatchView batch);

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int max_epochs = 20000;
  int stagnation_window = 50;
  double stagnation_rel_tol = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  std::vector<double> train_nmse_history;
  std::vector<double> val_nmse_history;
  double final_train_nmse = 0.0;
  double final_val_nmse = 0.0;

  bool operator==(const TrainReport&) const = default;
};

struct TrainResult {
  MlpNetwork net;
  TrainReport report;
};

/// Fits the scalers on data.train, then runs mini-batch Adam on the scaled MSE.
/// Stops at max_epochs or when the best training NMSE improved by less than
/// stagnation_rel_tol (relative) over the last stagnation_window epochs.
/// Returns the parameters with the lowest validation NMSE.
TrainResult train(MlpNetwork net, const SplitDataset& data, const TrainConfig& cfg);

enum class FlopMode { Paper, Exact };

/// Paper: (4N + 2) N^2 H (1 + n_q).
/// Exact: 2 N n_q + 2 N for the first layer, N (2N + 1) + N per further hidden
/// layer, 2N + 1 for the output node.
std::uint64_t nn_flops(std::uint64_t neurons, std::uint64_t hidden_layers, std::uint64_t n_q,
                       FlopMode mode = FlopMode::Paper);

/// 4 [N^2 (L - 1) + N (L - 2)] bytes of float32 parameters for L layers of N.
std::uint64_t memory_bytes(std::uint64_t neurons, std::uint64_t layers);

void save(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load(const std::filesystem::path& path);

}  // namespace oscint
