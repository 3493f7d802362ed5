#include "oscint/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "oscint/error.hpp"
#include "text_io.hpp"

namespace oscint {

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  // Lowest failing index wins so the reported error does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> input_abscissae(Domain domain, int n_in) {
  if (n_in < 1) throw Error(ErrorCode::InvalidArgument, "n_in must be >= 1");
  return make_grid(Rule::Midpoint, domain.s1, domain.s2, n_in).abscissae;
}

double surrogate_truth(const BoundIntegrand& f, int panels) {
  const Grid grid = make_grid(Rule::Trapezoid, f.domain().s1, f.domain().s2, panels);
  std::vector<double> values(grid.abscissae.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.abscissae[i]);
  return integrate(Rule::Trapezoid, values, grid.dx());
}

double surrogate_truth(const IntegrandSpec& spec, const ParamVector& params, int panels) {
  return surrogate_truth(BoundIntegrand(spec, params), panels);
}

double TruthRefinement::drift() const {
  const double denom = std::max(std::abs(fine), std::numeric_limits<double>::min());
  return std::abs(truth - fine) / denom;
}

TruthRefinement truth_refinement_values(const IntegrandSpec& spec, const ParamVector& params) {
  const BoundIntegrand f(spec, params);
  return {surrogate_truth(f, kTruthPanels / 2), surrogate_truth(f, kTruthPanels),
          surrogate_truth(f, kTruthPanels * 2)};
}

TruthRefinement truth_refinement_check(const IntegrandSpec& spec, const ParamVector& params,
                                       double tolerance) {
  const TruthRefinement r = truth_refinement_values(spec, params);
  if (!(r.drift() <= tolerance)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << to_string(spec.family) << ": I(2^12)=" << r.coarse << " I(2^13)=" << r.truth
        << " I(2^14)=" << r.fine << " relative drift " << r.drift() << " > " << tolerance;
    throw Error(ErrorCode::TruthNotConverged, msg.str());
  }
  return r;
}

ParametricDraws draw_samples(const IntegrandSpec& spec, std::size_t m, std::uint64_t seed,
                             std::span<const int> input_sizes, const GenerationOptions& options) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  ParametricDraws out;
  out.spec = spec;
  out.seed = seed;
  out.params.resize(m);
  out.truths.resize(m);

  std::map<int, std::vector<double>> nodes;
  for (int n_in : input_sizes) {
    nodes.emplace(n_in, input_abscissae(spec.domain, n_in));
    out.inputs[n_in].resize(m);
  }
  const Grid truth_grid = make_grid(Rule::Trapezoid, spec.domain.s1, spec.domain.s2, kTruthPanels);
  std::vector<std::size_t> rejections(m, 0);

  parallel_for(m, options.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    std::vector<double> values(truth_grid.abscissae.size());
    for (int attempt = 0;; ++attempt) {
      if (attempt >= options.max_attempts) {
        throw Error(ErrorCode::InvalidArgument,
                    "sample " + std::to_string(i) + ": no draw with a usable reference integral after " +
                        std::to_string(options.max_attempts) + " attempts");
      }
      ParamVector params = sample_params(spec, rng);
      const BoundIntegrand f(spec, params);
      double peak = 0.0;
      for (std::size_t j = 0; j < values.size(); ++j) {
        values[j] = f(truth_grid.abscissae[j]);
        peak = std::max(peak, std::abs(values[j]));
      }
      const double truth = integrate(Rule::Trapezoid, values, truth_grid.dx());
      if (!std::isfinite(truth)) {
        throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(i) + ": non-finite integral");
      }
      if (std::abs(truth) < options.resample_factor * spec.domain.width() * peak) {
        ++rejections[i];
        continue;
      }
      for (const auto& [n_in, xs] : nodes) {
        std::vector<double>& row = out.inputs[n_in][i];
        row.resize(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) row[j] = f(xs[j]);
      }
      out.params[i] = std::move(params);
      out.truths[i] = truth;
      return;
    }
  });
  for (std::size_t r : rejections) out.resampled += r;
  return out;
}

Dataset to_dataset(const ParametricDraws& draws, int n_in) {
  auto it = draws.inputs.find(n_in);
  if (it == draws.inputs.end()) {
    throw Error(ErrorCode::InvalidArgument, "inputs for n_in = " + std::to_string(n_in) + " were not drawn");
  }
  Dataset ds;
  ds.family = draws.spec.family;
  ds.domain = draws.spec.domain;
  ds.n_in = n_in;
  ds.seed = draws.seed;
  ds.samples.reserve(draws.params.size());
  for (std::size_t i = 0; i < draws.params.size(); ++i) {
    ds.samples.push_back({draws.params[i], it->second[i], draws.truths[i]});
  }
  return ds;
}

Dataset build_dataset(const IntegrandSpec& spec, std::size_t m, int n_in, std::uint64_t seed,
                      const GenerationOptions& options) {
  const int sizes[] = {n_in};
  return to_dataset(draw_samples(spec, m, seed, sizes, options), n_in);
}

Dataset build_dataset(Family family, std::size_t m, int n_in, Domain domain, std::uint64_t seed) {
  IntegrandSpec spec = IntegrandSpec::defaults(family);
  spec.domain = domain;
  return build_dataset(spec, m, n_in, seed);
}

SplitDataset split(const Dataset& dataset, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split ratios must be positive and sum to 1");
  }
  const std::size_t m = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * m + 0.5));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * m + 0.5));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= m) {
    throw Error(ErrorCode::EmptySplit, "cannot split " + std::to_string(m) +
                                           " samples into three non-empty parts");
  }

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  SplitDataset out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->family = dataset.family;
    part->domain = dataset.domain;
    part->n_in = dataset.n_in;
    part->seed = dataset.seed;
  }
  for (std::size_t i = 0; i < m; ++i) {
    Dataset& part = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
    part.samples.push_back(dataset.samples[order[i]]);
  }
  return out;
}

namespace {

std::string header_row(Family family, int n_in) {
  std::string row;
  const std::size_t n_params = default_param_space(family).intervals.size();
  for (std::size_t i = 0; i < n_params; ++i) row += "param_" + std::to_string(i) + ",";
  for (int i = 0; i < n_in; ++i) row += "x_" + std::to_string(i) + ",";
  row += "truth";
  return row;
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << "# family=" << to_string(ds.family) << '\n';
  out << "# s1=" << text::format_double(ds.domain.s1) << '\n';
  out << "# s2=" << text::format_double(ds.domain.s2) << '\n';
  out << "# n_in=" << ds.n_in << '\n';
  out << "# seed=" << ds.seed << '\n';
  out << header_row(ds.family, ds.n_in) << '\n';
  for (const Sample& s : ds.samples) {
    std::string row;
    for (double p : s.params.values) row += text::format_double(p) + ",";
    for (double v : s.inputs) row += text::format_double(v) + ",";
    row += text::format_double(s.truth);
    out << row << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());

  std::map<std::string, std::string, std::less<>> meta;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  Dataset ds;
  std::size_t n_params = 0;
  std::size_t n_cols = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (have_header) malformed(path, line_no, "comment after header row");
      view.remove_prefix(1);
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) malformed(path, line_no, "expected '# key=value'");
      meta[std::string(text::trim(view.substr(0, eq)))] = std::string(text::trim(view.substr(eq + 1)));
      continue;
    }
    if (!have_header) {
      for (const char* key : {"family", "s1", "s2", "n_in", "seed"}) {
        if (!meta.contains(key)) malformed(path, line_no, std::string("missing '# ") + key + "=' line");
      }
      try {
        ds.family = parse_family(meta["family"]);
      } catch (const Error&) {
        throw Error(ErrorCode::SchemaMismatch, path.string() + ": unknown family '" + meta["family"] + "'");
      }
      if (!text::parse_double(meta["s1"], ds.domain.s1) || !text::parse_double(meta["s2"], ds.domain.s2) ||
          !text::parse_int(meta["n_in"], ds.n_in) || !text::parse_int(meta["seed"], ds.seed) || ds.n_in < 1) {
        malformed(path, line_no, "bad metadata value");
      }
      if (std::string(view) != header_row(ds.family, ds.n_in)) {
        throw Error(ErrorCode::SchemaMismatch,
                    path.string() + ":" + std::to_string(line_no) + ": header does not match family/n_in");
      }
      n_params = default_param_space(ds.family).intervals.size();
      n_cols = n_params + static_cast<std::size_t>(ds.n_in) + 1;
      have_header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != n_cols) {
      malformed(path, line_no, "expected " + std::to_string(n_cols) + " columns, found " +
                                   std::to_string(fields.size()));
    }
    Sample s;
    s.params.family = ds.family;
    s.params.values.resize(n_params);
    s.inputs.resize(static_cast<std::size_t>(ds.n_in));
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v;
      if (!text::parse_double(text::trim(fields[c]), v)) {
        malformed(path, line_no, "column " + std::to_string(c) + " is not a number");
      }
      if (c < n_params) {
        s.params.values[c] = v;
      } else if (c + 1 < n_cols) {
        s.inputs[c - n_params] = v;
      } else {
        s.truth = v;
      }
    }
    ds.samples.push_back(std::move(s));
  }
  if (!have_header) malformed(path, line_no, "no header row");
  return ds;
}

}  // namespace oscint
