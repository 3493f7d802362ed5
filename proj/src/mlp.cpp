#include "oscint/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "oscint/error.hpp"
#include "oscint/metrics.hpp"
#include "text_io.hpp"

namespace oscint {
namespace {

void check_arch(const Architecture& a) {
  if (a.n_in < 1 || a.hidden_layers < 1 || a.neurons < 1) {
    throw Error(ErrorCode::InvalidArgument, "architecture needs n_in, H, N >= 1");
  }
}

// Per-sample activations, reused across a batch.
struct Workspace {
  std::vector<std::vector<double>> pre;   // pre-activation per hidden layer
  std::vector<std::vector<double>> post;  // ReLU output per hidden layer
  std::vector<double> delta;
  std::vector<double> delta_prev;

  explicit Workspace(const MlpNetwork& net) {
    const std::size_t n = static_cast<std::size_t>(net.arch.neurons);
    pre.assign(static_cast<std::size_t>(net.arch.hidden_layers), std::vector<double>(n));
    post = pre;
    delta.resize(n);
    delta_prev.resize(n);
  }
};

double run_forward(const MlpNetwork& net, const double* x, Workspace& ws) {
  const double* in = x;
  const int hidden = net.arch.hidden_layers;
  for (int l = 0; l < hidden; ++l) {
    const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
    std::vector<double>& z = ws.pre[static_cast<std::size_t>(l)];
    std::vector<double>& a = ws.post[static_cast<std::size_t>(l)];
    for (int r = 0; r < layer.rows; ++r) {
      const double* w = &layer.weights[static_cast<std::size_t>(r) * layer.cols];
      double acc = layer.biases[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer.cols; ++c) acc += w[c] * in[c];
      z[static_cast<std::size_t>(r)] = acc;
      a[static_cast<std::size_t>(r)] = acc > 0.0 ? acc : 0.0;
    }
    in = a.data();
  }
  const DenseLayer& out = net.layers.back();
  double acc = out.biases[0];
  for (int c = 0; c < out.cols; ++c) acc += out.weights[static_cast<std::size_t>(c)] * in[c];
  return acc;
}

std::vector<double> scale_inputs(const MlpNetwork& net, const Dataset& data) {
  const std::size_t n_in = static_cast<std::size_t>(net.arch.n_in);
  std::vector<double> out(data.size() * n_in);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.samples[i].inputs;
    if (x.size() != n_in) {
      throw Error(ErrorCode::ShapeMismatch, "sample has " + std::to_string(x.size()) +
                                                " inputs, network expects " + std::to_string(n_in));
    }
    for (std::size_t j = 0; j < n_in; ++j) out[i * n_in + j] = (x[j] - net.input_mean[j]) / net.input_std[j];
  }
  return out;
}

std::vector<double> truths_of(const Dataset& data) {
  std::vector<double> t(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) t[i] = data.samples[i].truth;
  return t;
}

std::vector<double> predict_scaled_rows(const MlpNetwork& net, std::span<const double> x,
                                        std::size_t rows, Workspace& ws) {
  const std::size_t n_in = static_cast<std::size_t>(net.arch.n_in);
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = run_forward(net, &x[i * n_in], ws) * net.target_scale;
  return out;
}

// Adam state over the flattened parameter vector (weights then biases, layer by layer).
class Adam {
 public:
  Adam(const MlpNetwork& net, double lr) : lr_(lr) {
    std::size_t n = 0;
    for (const auto& l : net.layers) n += l.weights.size() + l.biases.size();
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }

  void step(MlpNetwork& net, const Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    std::size_t k = 0;
    auto update = [&](std::vector<double>& p, const std::vector<double>& grad) {
      for (std::size_t i = 0; i < p.size(); ++i, ++k) {
        m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * grad[i];
        v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double m_hat = m_[k] / c1;
        const double v_hat = v_[k] / c2;
        p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kEps);
      }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      update(net.layers[l].weights, g[l].weights);
      update(net.layers[l].biases, g[l].biases);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  double t_ = 0.0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

MlpNetwork init(const Architecture& arch, std::uint64_t seed) {
  check_arch(arch);
  MlpNetwork net;
  net.arch = arch;
  Rng rng(seed);
  int fan_in = arch.n_in;
  for (int l = 0; l <= arch.hidden_layers; ++l) {
    const int rows = l == arch.hidden_layers ? 1 : arch.neurons;
    DenseLayer layer{rows, fan_in, std::vector<double>(static_cast<std::size_t>(rows) * fan_in),
                     std::vector<double>(static_cast<std::size_t>(rows), 0.0)};
    const double limit = std::sqrt(6.0 / (fan_in + rows));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(layer));
    fan_in = rows;
  }
  net.input_mean.assign(static_cast<std::size_t>(arch.n_in), 0.0);
  net.input_std.assign(static_cast<std::size_t>(arch.n_in), 1.0);
  net.target_scale = 1.0;
  return net;
}

double forward_scaled(const MlpNetwork& net, std::span<const double> scaled_inputs) {
  if (scaled_inputs.size() != static_cast<std::size_t>(net.arch.n_in)) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(net.arch.n_in) + " inputs, got " +
                                              std::to_string(scaled_inputs.size()));
  }
  Workspace ws(net);
  return run_forward(net, scaled_inputs.data(), ws);
}

double forward(const MlpNetwork& net, std::span<const double> inputs) {
  if (inputs.size() != static_cast<std::size_t>(net.arch.n_in)) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(net.arch.n_in) + " inputs, got " +
                                              std::to_string(inputs.size()));
  }
  std::vector<double> z(inputs.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = (inputs[j] - net.input_mean[j]) / net.input_std[j];
  Workspace ws(net);
  return run_forward(net, z.data(), ws) * net.target_scale;
}

std::vector<double> predict(const MlpNetwork& net, const Dataset& data) {
  const auto x = scale_inputs(net, data);
  Workspace ws(net);
  return predict_scaled_rows(net, x, data.size(), ws);
}

double scaled_loss(const MlpNetwork& net, BatchView batch) {
  const std::size_t n_in = static_cast<std::size_t>(net.arch.n_in);
  const std::size_t rows = batch.targets.size();
  if (rows == 0 || batch.inputs.size() != rows * n_in) {
    throw Error(ErrorCode::ShapeMismatch, "batch shape does not match the network");
  }
  Workspace ws(net);
  double acc = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double e = run_forward(net, &batch.inputs[i * n_in], ws) - batch.targets[i];
    acc += e * e;
  }
  return acc / static_cast<double>(rows);
}

Gradients gradient(const MlpNetwork& net, BatchView batch) {
  const std::size_t n_in = static_cast<std::size_t>(net.arch.n_in);
  const std::size_t rows = batch.targets.size();
  if (rows == 0 || batch.inputs.size() != rows * n_in) {
    throw Error(ErrorCode::ShapeMismatch, "batch shape does not match the network");
  }
  Gradients g;
  g.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.push_back({l.rows, l.cols, std::vector<double>(l.weights.size(), 0.0),
                 std::vector<double>(l.biases.size(), 0.0)});
  }

  Workspace ws(net);
  const int hidden = net.arch.hidden_layers;
  const double scale = 2.0 / static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* x = &batch.inputs[i * n_in];
    const double d_out = scale * (run_forward(net, x, ws) - batch.targets[i]);

    // Output node.
    const DenseLayer& out = net.layers.back();
    DenseLayer& g_out = g.back();
    const std::vector<double>& a_last = ws.post[static_cast<std::size_t>(hidden - 1)];
    for (int c = 0; c < out.cols; ++c) {
      g_out.weights[static_cast<std::size_t>(c)] += d_out * a_last[static_cast<std::size_t>(c)];
    }
    g_out.biases[0] += d_out;
    const std::vector<double>& z_last = ws.pre[static_cast<std::size_t>(hidden - 1)];
    for (int c = 0; c < out.cols; ++c) {
      const auto j = static_cast<std::size_t>(c);
      ws.delta[j] = z_last[j] > 0.0 ? out.weights[j] * d_out : 0.0;
    }

    for (int l = hidden - 1; l >= 0; --l) {
      const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
      DenseLayer& gl = g[static_cast<std::size_t>(l)];
      const double* a_in = l == 0 ? x : ws.post[static_cast<std::size_t>(l - 1)].data();
      for (int r = 0; r < layer.rows; ++r) {
        const double d = ws.delta[static_cast<std::size_t>(r)];
        if (d == 0.0) continue;
        double* gw = &gl.weights[static_cast<std::size_t>(r) * layer.cols];
        for (int c = 0; c < layer.cols; ++c) gw[c] += d * a_in[c];
        gl.biases[static_cast<std::size_t>(r)] += d;
      }
      if (l == 0) break;
      const std::vector<double>& z_prev = ws.pre[static_cast<std::size_t>(l - 1)];
      for (int c = 0; c < layer.cols; ++c) {
        double acc = 0.0;
        if (z_prev[static_cast<std::size_t>(c)] > 0.0) {
          for (int r = 0; r < layer.rows; ++r) acc += layer.w(r, c) * ws.delta[static_cast<std::size_t>(r)];
        }
        ws.delta_prev[static_cast<std::size_t>(c)] = acc;
      }
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  return g;
}

TrainResult train(MlpNetwork net, const SplitDataset& data, const TrainConfig& cfg) {
  if (data.train.samples.empty()) throw Error(ErrorCode::EmptyInput, "empty training split");
  if (data.val.samples.empty()) throw Error(ErrorCode::EmptyInput, "empty validation split");
  if (data.train.n_in != net.arch.n_in) {
    throw Error(ErrorCode::ShapeMismatch, "dataset n_in " + std::to_string(data.train.n_in) +
                                              " != network n_in " + std::to_string(net.arch.n_in));
  }
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.stagnation_window < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
  }

  const std::size_t n_in = static_cast<std::size_t>(net.arch.n_in);
  const std::size_t m = data.train.size();

  // Scalers from the training split only.
  for (std::size_t j = 0; j < n_in; ++j) {
    double mean = 0.0;
    for (const auto& s : data.train.samples) mean += s.inputs[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (const auto& s : data.train.samples) var += (s.inputs[j] - mean) * (s.inputs[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    net.input_mean[j] = mean;
    net.input_std[j] = sd > 0.0 ? sd : 1.0;
  }
  const std::vector<double> train_truth = truths_of(data.train);
  const std::vector<double> val_truth = truths_of(data.val);
  double ms = 0.0;
  for (double t : train_truth) ms += t * t;
  net.target_scale = ms > 0.0 ? std::sqrt(ms / static_cast<double>(m)) : 1.0;

  const std::vector<double> x_train = scale_inputs(net, data.train);
  const std::vector<double> x_val = scale_inputs(net, data.val);
  std::vector<double> y_train(m);
  for (std::size_t i = 0; i < m; ++i) y_train[i] = train_truth[i] / net.target_scale;

  Rng rng(derive_seed(cfg.seed, "shuffle"));
  Adam adam(net, cfg.learning_rate);
  Workspace ws(net);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), m);
  std::vector<double> bx(batch * n_in);
  std::vector<double> by(batch);

  TrainReport report;
  MlpNetwork best = net;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> running_min;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t start = 0; start < m; start += batch) {
      const std::size_t rows = std::min(batch, m - start);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(&x_train[src * n_in], n_in, &bx[r * n_in]);
        by[r] = y_train[src];
      }
      const Gradients g = gradient(net, {std::span(bx).first(rows * n_in), std::span(by).first(rows)});
      adam.step(net, g);
    }

    const double train_nmse = normalized_mse(predict_scaled_rows(net, x_train, m, ws), train_truth);
    const double val_nmse = normalized_mse(predict_scaled_rows(net, x_val, data.val.size(), ws), val_truth);
    if (!std::isfinite(train_nmse) || !std::isfinite(val_nmse)) {
      throw Error(ErrorCode::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));
    }
    report.train_nmse_history.push_back(train_nmse);
    report.val_nmse_history.push_back(val_nmse);
    report.epochs_run = epoch;
    running_min.push_back(running_min.empty() ? train_nmse : std::min(running_min.back(), train_nmse));

    if (val_nmse < best_val) {
      best_val = val_nmse;
      best = net;
      report.best_epoch = epoch;
      report.final_train_nmse = train_nmse;
      report.final_val_nmse = val_nmse;
    }

    const auto window = static_cast<std::size_t>(cfg.stagnation_window);
    if (running_min.size() > window) {
      const double before = running_min[running_min.size() - 1 - window];
      const double now = running_min.back();
      if (before - now < cfg.stagnation_rel_tol * before) break;
    }
  }
  return {std::move(best), std::move(report)};
}

std::uint64_t nn_flops(std::uint64_t neurons, std::uint64_t hidden_layers, std::uint64_t n_q,
                       FlopMode mode) {
  const std::uint64_t n = neurons;
  const std::uint64_t h = hidden_layers;
  if (mode == FlopMode::Paper) return (4 * n + 2) * n * n * h * (1 + n_q);
  const std::uint64_t first = 2 * n * n_q + n + n;
  const std::uint64_t hidden = n * (2 * n + 1) + n;
  const std::uint64_t output = 2 * n + 1;
  return first + (h - 1) * hidden + output;
}

std::uint64_t memory_bytes(std::uint64_t neurons, std::uint64_t layers) {
  if (layers < 2) throw Error(ErrorCode::InvalidArgument, "memory model needs L >= 2");
  return 4 * (neurons * neurons * (layers - 1) + neurons * (layers - 2));
}

// Model file:
//   version 1
//   arch <n_in> <H> <N>
//   input_scaler <n_in>        followed by n_in lines "<mean> <std>"
//   target_scaler <scale>
//   W <rows> <cols>            followed by rows lines of cols values
//   b <rows>                   followed by one line of rows values
// with a W/b pair per layer, input side first.
void save(const MlpNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << "version 1\n";
  out << "arch " << net.arch.n_in << ' ' << net.arch.hidden_layers << ' ' << net.arch.neurons << '\n';
  out << "input_scaler " << net.input_mean.size() << '\n';
  for (std::size_t j = 0; j < net.input_mean.size(); ++j) {
    out << text::format_double(net.input_mean[j]) << ' ' << text::format_double(net.input_std[j]) << '\n';
  }
  out << "target_scaler " << text::format_double(net.target_scale) << '\n';
  for (const DenseLayer& l : net.layers) {
    out << "W " << l.rows << ' ' << l.cols << '\n';
    for (int r = 0; r < l.rows; ++r) {
      for (int c = 0; c < l.cols; ++c) out << (c ? " " : "") << text::format_double(l.w(r, c));
      out << '\n';
    }
    out << "b " << l.rows << '\n';
    for (int r = 0; r < l.rows; ++r) {
      out << (r ? " " : "") << text::format_double(l.biases[static_cast<std::size_t>(r)]);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }

  std::string word() {
    std::string w;
    if (!(in_ >> w)) corrupt("unexpected end of file");
    return w;
  }

  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) corrupt("expected '" + keyword + "', found '" + w + "'");
  }

  long integer() {
    const std::string w = word();
    long v;
    if (!text::parse_int(w, v)) corrupt("expected an integer, found '" + w + "'");
    return v;
  }

  double real() {
    const std::string w = word();
    double v;
    if (!text::parse_double(w, v) || !std::isfinite(v)) corrupt("expected a finite number, found '" + w + "'");
    return v;
  }

  [[noreturn]] void corrupt(const std::string& what) {
    throw Error(ErrorCode::CorruptModel, path_.string() + ": " + what);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

MlpNetwork load(const std::filesystem::path& path) {
  ModelReader in(path);
  in.expect("version");
  const long version = in.integer();
  if (version != 1) {
    throw Error(ErrorCode::VersionMismatch, path.string() + ": model version " + std::to_string(version) +
                                                ", this build reads version 1");
  }
  in.expect("arch");
  Architecture arch;
  arch.n_in = static_cast<int>(in.integer());
  arch.hidden_layers = static_cast<int>(in.integer());
  arch.neurons = static_cast<int>(in.integer());
  if (arch.n_in < 1 || arch.hidden_layers < 1 || arch.neurons < 1 || arch.n_in > (1 << 20) ||
      arch.hidden_layers > 1024 || arch.neurons > 65536) {
    in.corrupt("implausible architecture");
  }
  MlpNetwork net = init(arch, 0);

  in.expect("input_scaler");
  if (in.integer() != arch.n_in) in.corrupt("input_scaler size does not match arch");
  for (int j = 0; j < arch.n_in; ++j) {
    net.input_mean[static_cast<std::size_t>(j)] = in.real();
    net.input_std[static_cast<std::size_t>(j)] = in.real();
  }
  in.expect("target_scaler");
  net.target_scale = in.real();

  for (DenseLayer& l : net.layers) {
    in.expect("W");
    if (in.integer() != l.rows || in.integer() != l.cols) in.corrupt("weight block shape does not match arch");
    for (double& w : l.weights) w = in.real();
    in.expect("b");
    if (in.integer() != l.rows) in.corrupt("bias block shape does not match arch");
    for (double& b : l.biases) b = in.real();
  }
  return net;
}

}  // namespace oscint
