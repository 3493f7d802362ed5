#include "oscint/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "oscint/error.hpp"

namespace oscint {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> truths_of(const Dataset& d) {
  std::vector<double> t;
  t.reserve(d.size());
  for (const Sample& s : d.samples) t.push_back(s.truth);
  return t;
}

std::string status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DivergedLoss: return "diverged";
    case ErrorCode::SimpsonOddCount: return "simpson_odd_count";
    default: return "failed";
  }
}

struct RuleCell {
  Rule rule;
  int n_q;
};

}  // namespace

void sort_report(SweepReport& report) {
  std::stable_sort(report.begin(), report.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.family != b.family) return a.family < b.family;
    if (a.method != b.method) return a.method < b.method;
    if (a.n_q != b.n_q) return a.n_q < b.n_q;
    if (a.hidden_layers != b.hidden_layers) return a.hidden_layers < b.hidden_layers;
    return a.neurons < b.neurons;
  });
}

SplitDataset ExperimentData::splits(int n_in) const {
  return split(to_dataset(draws, n_in), ratios, split_seed);
}

ExperimentData prepare_data(const ExperimentConfig& cfg, const IntegrandSpec& spec, std::size_t samples,
                            std::span<const int> input_sizes) {
  ExperimentData data;
  data.spec = spec;
  data.data_seed = derive_seed(cfg.seed, to_string(spec.family));
  data.split_seed = derive_seed(data.data_seed, "split");
  data.ratios = cfg.ratios();
  GenerationOptions opts;
  opts.resample_factor = cfg.resample_factor;
  opts.workers = cfg.workers;
  std::vector<int> sizes(input_sizes.begin(), input_sizes.end());
  if (sizes.empty()) sizes.push_back(1);
  data.draws = draw_samples(spec, samples, data.data_seed, sizes, opts);
  return data;
}

SweepReport run_quadrature_sweep(const ExperimentConfig& cfg, const ExperimentData& data) {
  const SplitDataset parts = data.splits(data.draws.inputs.begin()->first);
  const Dataset* sets[3] = {&parts.train, &parts.val, &parts.test};

  std::vector<RuleCell> cells;
  for (Rule rule : {Rule::Trapezoid, Rule::Midpoint, Rule::Simpson}) {
    for (int n : cfg.n_q_sweep) cells.push_back({rule, n});
  }

  // estimates[part][cell][sample]; NaN marks an evaluation failure.
  std::vector<std::vector<std::vector<double>>> estimates(3);
  for (int p = 0; p < 3; ++p) {
    const Dataset& d = *sets[p];
    estimates[p].assign(cells.size(), std::vector<double>(d.size(), kNaN));
    parallel_for(d.size(), cfg.workers, [&](std::size_t i) {
      const BoundIntegrand f(data.spec, d.samples[i].params);
      const std::function<double(double)> fn = [&f](double x) { return f(x); };
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].rule == Rule::Simpson && cells[c].n_q % 2 != 0) continue;
        try {
          estimates[p][c][i] = integrate(cells[c].rule, fn, data.spec.domain.s1, data.spec.domain.s2, cells[c].n_q);
        } catch (const Error&) {
          estimates[p][c][i] = kNaN;
        }
      }
    });
  }

  SweepReport report;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row;
    row.family = data.spec.family;
    row.method = method_of(cells[c].rule);
    row.n_q = cells[c].n_q;
    row.flops_paper = row.flops_exact = flop_cost(cells[c].rule, static_cast<std::uint64_t>(cells[c].n_q));
    row.seed = cfg.seed;
    if (cells[c].rule == Rule::Simpson && cells[c].n_q % 2 != 0) {
      row.train_nmse = row.val_nmse = row.test_nmse = kNaN;
      row.status = "simpson_odd_count";
      report.push_back(row);
      continue;
    }
    double nmse[3];
    for (int p = 0; p < 3; ++p) {
      const auto& est = estimates[p][c];
      if (std::any_of(est.begin(), est.end(), [](double v) { return !std::isfinite(v); })) {
        nmse[p] = kNaN;
        row.status = "failed";
      } else {
        nmse[p] = normalized_mse(est, truths_of(*sets[p]));
      }
    }
    row.train_nmse = nmse[0];
    row.val_nmse = nmse[1];
    row.test_nmse = nmse[2];
    report.push_back(row);
  }
  sort_report(report);
  return report;
}

SweepReport run_nn_sweep(const ExperimentConfig& cfg, const ExperimentData& data) {
  const std::vector<int>& sizes = cfg.nn_n_q_sweep;
  SweepReport report(sizes.size());
  const std::uint64_t family_seed = derive_seed(cfg.seed, "nn:" + std::string(to_string(data.spec.family)));
  parallel_for(sizes.size(), cfg.workers, [&](std::size_t c) {
    const int n = sizes[c];
    SweepRow& row = report[c];
    row.family = data.spec.family;
    row.method = Method::NeuralNet;
    row.n_q = n;
    row.hidden_layers = cfg.arch.hidden_layers;
    row.neurons = cfg.arch.neurons;
    const auto N = static_cast<std::uint64_t>(cfg.arch.neurons);
    const auto H = static_cast<std::uint64_t>(cfg.arch.hidden_layers);
    row.flops_paper = nn_flops(N, H, static_cast<std::uint64_t>(n), FlopMode::Paper);
    row.flops_exact = nn_flops(N, H, static_cast<std::uint64_t>(n), FlopMode::Exact);
    row.seed = cfg.seed;
    const std::uint64_t cell_seed = derive_seed(family_seed, static_cast<std::uint64_t>(n));
    try {
      const SplitDataset parts = data.splits(n);
      TrainConfig tc = cfg.train;
      tc.seed = cell_seed;
      const TrainResult res = train(init({n, cfg.arch.hidden_layers, cfg.arch.neurons}, cell_seed), parts, tc);
      row.train_nmse = res.report.final_train_nmse;
      row.val_nmse = res.report.final_val_nmse;
      row.test_nmse = normalized_mse(predict(res.net, parts.test), truths_of(parts.test));
      row.epochs = res.report.epochs_run;
    } catch (const Error& e) {
      row.train_nmse = row.val_nmse = row.test_nmse = kNaN;
      row.status = status_of(e);
    }
  });
  sort_report(report);
  return report;
}

SweepReport run_quadrature_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const ExperimentData data = prepare_data(cfg, cfg.spec(), cfg.samples_for(cfg.family), {});
  return run_quadrature_sweep(cfg, data);
}

SweepReport run_nn_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const ExperimentData data = prepare_data(cfg, cfg.spec(), cfg.samples_for(cfg.family), cfg.nn_n_q_sweep);
  return run_nn_sweep(cfg, data);
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const ExperimentData data = prepare_data(cfg, cfg.spec(), cfg.samples_for(cfg.family), cfg.nn_n_q_sweep);
  SweepReport report = run_quadrature_sweep(cfg, data);
  SweepReport nn = run_nn_sweep(cfg, data);
  report.insert(report.end(), nn.begin(), nn.end());
  sort_report(report);
  return report;
}

SearchResult hyperparameter_search(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.hidden_layers_grid.empty() || cfg.neurons_grid.empty() || cfg.samples_grid.empty() ||
      cfg.learning_rate_grid.empty() || cfg.val_fraction_grid.empty()) {
    throw Error(ErrorCode::InvalidArgument, "search grid is empty");
  }
  const std::size_t max_m = *std::max_element(cfg.samples_grid.begin(), cfg.samples_grid.end());
  const int n_in = cfg.arch.n_in;
  const std::vector<int> sizes{n_in};
  // Per-sample streams make a prefix of the largest draw equal to a smaller draw.
  const ExperimentData full = prepare_data(cfg, cfg.spec(), max_m, sizes);

  struct Cell {
    int h, n;
    double lr;
    std::size_t m;
    double vf;
  };
  std::vector<Cell> cells;
  for (std::size_t m : cfg.samples_grid) {
    for (double vf : cfg.val_fraction_grid) {
      for (double lr : cfg.learning_rate_grid) {
        for (int h : cfg.hidden_layers_grid) {
          for (int n : cfg.neurons_grid) cells.push_back({h, n, lr, m, vf});
        }
      }
    }
  }

  SearchResult result;
  result.table.resize(cells.size());
  const std::uint64_t search_seed = derive_seed(cfg.seed, "search");
  parallel_for(cells.size(), cfg.workers, [&](std::size_t c) {
    const Cell& cell = cells[c];
    SearchRow& sr = result.table[c];
    sr.learning_rate = cell.lr;
    sr.samples = cell.m;
    sr.val_fraction = cell.vf;
    SweepRow& row = sr.row;
    row.family = cfg.family;
    row.method = Method::NeuralNet;
    row.n_q = n_in;
    row.hidden_layers = cell.h;
    row.neurons = cell.n;
    row.flops_paper = nn_flops(static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.h),
                               static_cast<std::uint64_t>(n_in), FlopMode::Paper);
    row.flops_exact = nn_flops(static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.h),
                               static_cast<std::uint64_t>(n_in), FlopMode::Exact);
    row.seed = cfg.seed;
    const std::uint64_t cell_seed = derive_seed(search_seed, c);
    try {
      Dataset ds = to_dataset(full.draws, n_in);
      ds.samples.resize(cell.m);
      const SplitDataset parts = split(ds, {1.0 - 2.0 * cell.vf, cell.vf, cell.vf}, full.split_seed);
      TrainConfig tc = cfg.train;
      tc.learning_rate = cell.lr;
      tc.seed = cell_seed;
      const TrainResult res = train(init({n_in, cell.h, cell.n}, cell_seed), parts, tc);
      row.train_nmse = res.report.final_train_nmse;
      row.val_nmse = res.report.final_val_nmse;
      row.test_nmse = normalized_mse(predict(res.net, parts.test), truths_of(parts.test));
      row.epochs = res.report.epochs_run;
      sr.feasible = row.val_nmse <= cfg.target_nmse;
    } catch (const Error& e) {
      row.train_nmse = row.val_nmse = row.test_nmse = kNaN;
      row.status = status_of(e);
    }
  });

  const SearchRow* best = nullptr;
  for (const SearchRow& sr : result.table) {
    if (sr.row.status != "ok") continue;
    if (!best) {
      best = &sr;
      continue;
    }
    if (sr.feasible != best->feasible) {
      if (sr.feasible) best = &sr;
      continue;
    }
    if (sr.feasible && sr.row.flops_paper != best->row.flops_paper) {
      if (sr.row.flops_paper < best->row.flops_paper) best = &sr;
      continue;
    }
    if (sr.row.val_nmse < best->row.val_nmse) best = &sr;
  }
  if (!best) throw Error(ErrorCode::NoFeasibleArch, "every search cell failed to train");
  result.best = {n_in, best->row.hidden_layers, best->row.neurons};
  result.learning_rate = best->learning_rate;
  result.samples = best->samples;
  result.val_fraction = best->val_fraction;
  result.best_val_nmse = best->row.val_nmse;
  result.feasible = best->feasible;
  return result;
}

SearchResult hyperparameter_search_strict(const ExperimentConfig& cfg) {
  SearchResult r = hyperparameter_search(cfg);
  if (!r.feasible) {
    throw Error(ErrorCode::NoFeasibleArch,
                "no architecture reached validation NMSE " + std::to_string(cfg.target_nmse) + "; best was H=" +
                    std::to_string(r.best.hidden_layers) + " N=" + std::to_string(r.best.neurons) +
                    " at " + std::to_string(r.best_val_nmse));
  }
  return r;
}

std::vector<MethodCurve> curves_from_report(const SweepReport& report, Family family) {
  std::vector<MethodCurve> curves;
  for (Method m : {Method::NeuralNet, Method::Trapezoid, Method::Midpoint, Method::Simpson}) {
    MethodCurve curve{m, {}};
    for (const SweepRow& row : report) {
      if (row.family != family || row.method != m || row.status != "ok" || !std::isfinite(row.test_nmse)) continue;
      curve.points.push_back({row.n_q, row.flops_paper, row.test_nmse});
    }
    curve.sort();
    curves.push_back(std::move(curve));
  }
  return curves;
}

double paper_alpha(Family family) {
  switch (family) {
    case Family::Bessel: return 6.01;
    case Family::EvanWebster1: return 17.72;
    case Family::RayleighPlesset: return 23.46;
    case Family::EvanWebster2: return 19.60;
    case Family::Sine: return 0.91;
    case Family::Exponential: return 0.60;
  }
  return kNaN;
}

namespace {

// Alpha from one family's curves; unreachable sides are reported in `status`.
void fill_alpha(const std::vector<MethodCurve>& curves, double target, std::uint64_t& flops_nn,
                std::uint64_t& flops_qm, std::optional<Method>& best_rule, double& alpha_out, double& gain,
                std::string& status) {
  bool nn_ok = true;
  try {
    flops_nn = flops_at_accuracy(curves[0], target);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TargetUnreachable) throw;
    nn_ok = false;
  }
  bool qm_ok = false;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    try {
      const std::uint64_t f = flops_at_accuracy(curves[i], target);
      if (!qm_ok || f < flops_qm) {
        flops_qm = f;
        best_rule = curves[i].method;
        qm_ok = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TargetUnreachable) throw;
    }
  }
  if (nn_ok && qm_ok) {
    alpha_out = alpha(flops_nn, flops_qm);
    gain = static_cast<double>(flops_qm) / static_cast<double>(flops_nn);
    status = "ok";
  } else {
    alpha_out = gain = kNaN;
    status = !nn_ok && !qm_ok ? "target_unreachable" : (!nn_ok ? "nn_unreachable" : "qm_unreachable");
  }
}

}  // namespace

Table2Result reproduce_table2(const ExperimentConfig& cfg, std::span<const Family> families) {
  validate(cfg);
  Table2Result out;
  for (Family f : families) {
    const ExperimentData data = prepare_data(cfg, cfg.spec_for(f), cfg.samples_for(f), cfg.nn_n_q_sweep);
    SweepReport rows = run_quadrature_sweep(cfg, data);
    SweepReport nn = run_nn_sweep(cfg, data);
    rows.insert(rows.end(), nn.begin(), nn.end());
    const auto curves = curves_from_report(rows, f);
    Table2Row t;
    t.family = f;
    t.target_nmse = cfg.target_nmse;
    t.paper_alpha = paper_alpha(f);
    fill_alpha(curves, cfg.target_nmse, t.flops_nn, t.flops_qm, t.best_rule, t.alpha, t.gain, t.status);
    out.rows.push_back(t);
    out.report.insert(out.report.end(), rows.begin(), rows.end());
  }
  sort_report(out.report);
  return out;
}

std::vector<double> default_oscillatoriness_grid(Family family) {
  const Interval iv = default_param_space(family).intervals.front();
  const double lo = iv.lo;
  const double hi = 4.0 * iv.hi;
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i) grid.push_back(lo * std::pow(hi / lo, i / 4.0));
  return grid;
}

std::vector<OscillatorinessPoint> alpha_vs_oscillatoriness(const ExperimentConfig& cfg, Family family,
                                                           std::span<const double> grid, double target_nmse) {
  validate(cfg);
  std::vector<OscillatorinessPoint> points;
  for (double level : grid) {
    if (!(level > 0.0)) throw Error(ErrorCode::InvalidArgument, "oscillatoriness levels must be positive");
    IntegrandSpec spec = cfg.spec_for(family);
    spec.space = spec.space.scaled(level / spec.space.intervals.front().lo);
    OscillatorinessPoint pt;
    pt.parameter = level;
    try {
      const ExperimentData data = prepare_data(cfg, spec, cfg.samples_for(family), cfg.nn_n_q_sweep);
      SweepReport rows = run_quadrature_sweep(cfg, data);
      SweepReport nn = run_nn_sweep(cfg, data);
      rows.insert(rows.end(), nn.begin(), nn.end());
      std::optional<Method> best_rule;
      double gain = 0.0;
      fill_alpha(curves_from_report(rows, family), target_nmse, pt.flops_nn, pt.flops_qm, best_rule, pt.alpha,
                 gain, pt.status);
    } catch (const Error& e) {
      pt.alpha = kNaN;
      pt.status = status_of(e);
    }
    points.push_back(pt);
  }
  return points;
}

}  // namespace oscint
