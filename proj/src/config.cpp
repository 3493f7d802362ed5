#include <cmath>
#include <cstdlib>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <tomlplusplus/toml.hpp>

#include "oscint/error.hpp"
#include "oscint/harness.hpp"

namespace oscint {

ExperimentConfig::ExperimentConfig() {
  for (int p = 0; p <= 13; ++p) n_q_sweep.push_back(1 << p);
  for (int p = 0; p <= 6; ++p) nn_n_q_sweep.push_back(1 << p);
}

IntegrandSpec ExperimentConfig::spec_for(Family f) const {
  IntegrandSpec s = IntegrandSpec::defaults(f);
  s.domain = domain;
  s.rp = rp;
  if (f == family && param_space) s.space = *param_space;
  return s;
}

IntegrandSpec ExperimentConfig::spec() const { return spec_for(family); }

std::size_t ExperimentConfig::samples_for(Family f) const {
  return f == Family::RayleighPlesset ? rp_samples : samples;
}

SplitRatios ExperimentConfig::ratios() const {
  return {1.0 - 2.0 * val_fraction, val_fraction, val_fraction};
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(cfg.domain.s1 < cfg.domain.s2) || !std::isfinite(cfg.domain.s1) || !std::isfinite(cfg.domain.s2)) {
    throw Error(ErrorCode::InvalidDomain, "domain needs finite s1 < s2");
  }
  if (cfg.param_space) {
    const auto expected = default_param_space(cfg.family).intervals.size();
    if (cfg.param_space->intervals.size() != expected) {
      fail("family " + std::string(to_string(cfg.family)) + " takes " + std::to_string(expected) +
           " parameter intervals");
    }
    for (const Interval& iv : cfg.param_space->intervals) {
      if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) fail("parameter interval needs lo < hi");
    }
  }
  for (int n : cfg.n_q_sweep) {
    if (n < 1) fail("n_q values must be >= 1");
  }
  for (int n : cfg.nn_n_q_sweep) {
    if (n < 1) fail("nn_n_q values must be >= 1");
  }
  for (int h : cfg.hidden_layers_grid) {
    if (h < 1) fail("hidden layer counts must be >= 1");
  }
  for (int n : cfg.neurons_grid) {
    if (n < 1) fail("neuron counts must be >= 1");
  }
  for (double v : cfg.val_fraction_grid) {
    if (!(v > 0.0 && v < 0.5)) fail("validation fractions must lie in (0, 0.5)");
  }
  for (double lr : cfg.learning_rate_grid) {
    if (!(lr > 0.0)) fail("learning rates must be positive");
  }
  for (double p : cfg.oscillatoriness_grid) {
    if (!(p > 0.0)) fail("oscillatoriness levels must be positive");
  }
  if (cfg.arch.n_in < 1 || cfg.arch.hidden_layers < 1 || cfg.arch.neurons < 1) fail("architecture needs values >= 1");
  if (cfg.samples < 3 || cfg.rp_samples < 3) fail("need at least 3 samples");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 0.5)) fail("val_fraction must lie in (0, 0.5)");
  if (!(cfg.train.learning_rate > 0.0) || cfg.train.batch_size < 1 || cfg.train.max_epochs < 1 ||
      cfg.train.stagnation_window < 1 || !(cfg.train.stagnation_rel_tol >= 0.0)) {
    fail("invalid [train] settings");
  }
  if (!(cfg.target_nmse >= 0.0)) fail("target_nmse must be >= 0");
  if (!(cfg.resample_factor >= 0.0)) fail("resample_factor must be >= 0");
  if (cfg.workers < 1) fail("workers must be >= 1");
  validate(cfg.rp);
}

namespace {

[[noreturn]] void bad_key(const std::string& source, const std::string& key, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, source + ": " + key + ": " + what);
}

double get_double(const toml::node& n, const std::string& source, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  bad_key(source, key, "expected a number");
}

std::int64_t get_int(const toml::node& n, const std::string& source, const std::string& key) {
  if (n.is_integer()) return n.as_integer()->get();
  bad_key(source, key, "expected an integer");
}

std::uint64_t get_u64(const toml::node& n, const std::string& source, const std::string& key) {
  const std::int64_t v = get_int(n, source, key);
  if (v < 0) bad_key(source, key, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

template <typename T, typename Get>
std::vector<T> get_list(const toml::node& n, const std::string& source, const std::string& key, Get get) {
  const toml::array* arr = n.as_array();
  if (!arr) bad_key(source, key, "expected an array");
  std::vector<T> out;
  for (const toml::node& item : *arr) out.push_back(static_cast<T>(get(item, source, key)));
  return out;
}

const toml::table& section(const toml::node& n, const std::string& source, const std::string& name) {
  const toml::table* t = n.as_table();
  if (!t) bad_key(source, name, "expected a table");
  return *t;
}

void read_family(ExperimentConfig& cfg, const toml::table& t, const std::string& src) {
  std::optional<std::vector<std::vector<double>>> params;
  for (auto&& [k, v] : t) {
    const std::string key = "family." + std::string(k.str());
    if (k == "name") {
      auto s = v.value<std::string>();
      if (!s) bad_key(src, key, "expected a string");
      cfg.family = parse_family(*s);
    } else if (k == "params") {
      const toml::array* arr = v.as_array();
      if (!arr) bad_key(src, key, "expected an array of [lo, hi] pairs");
      std::vector<std::vector<double>> ranges;
      for (const toml::node& item : *arr) ranges.push_back(get_list<double>(item, src, key, get_double));
      params = std::move(ranges);
    } else if (k == "resample_factor") {
      cfg.resample_factor = get_double(v, src, key);
    } else {
      bad_key(src, key, "unknown key");
    }
  }
  if (params) {
    ParamSpace space = default_param_space(cfg.family);
    if (params->size() != space.intervals.size()) {
      bad_key(src, "family.params", "family " + std::string(to_string(cfg.family)) + " takes " +
                                       std::to_string(space.intervals.size()) + " intervals");
    }
    for (std::size_t i = 0; i < params->size(); ++i) {
      const auto& r = (*params)[i];
      if (r.size() != 2) bad_key(src, "family.params", "each interval needs exactly [lo, hi]");
      space.intervals[i].lo = r[0];
      space.intervals[i].hi = r[1];
    }
    cfg.param_space = space;
  }
}

void read_domain(ExperimentConfig& cfg, const toml::table& t, const std::string& src) {
  for (auto&& [k, v] : t) {
    const std::string key = "domain." + std::string(k.str());
    if (k == "s1") {
      cfg.domain.s1 = get_double(v, src, key);
    } else if (k == "s2") {
      cfg.domain.s2 = get_double(v, src, key);
    } else {
      bad_key(src, key, "unknown key");
    }
  }
}

void read_sweep(ExperimentConfig& cfg, const toml::table& t, const std::string& src) {
  for (auto&& [k, v] : t) {
    const std::string key = "sweep." + std::string(k.str());
    if (k == "n_q") {
      cfg.n_q_sweep = get_list<int>(v, src, key, get_int);
    } else if (k == "nn_n_q") {
      cfg.nn_n_q_sweep = get_list<int>(v, src, key, get_int);
    } else if (k == "hidden_layers") {
      cfg.hidden_layers_grid = get_list<int>(v, src, key, get_int);
    } else if (k == "neurons") {
      cfg.neurons_grid = get_list<int>(v, src, key, get_int);
    } else if (k == "samples") {
      cfg.samples_grid = get_list<std::size_t>(v, src, key, get_u64);
    } else if (k == "learning_rates") {
      cfg.learning_rate_grid = get_list<double>(v, src, key, get_double);
    } else if (k == "val_fractions") {
      cfg.val_fraction_grid = get_list<double>(v, src, key, get_double);
    } else if (k == "oscillatoriness") {
      cfg.oscillatoriness_grid = get_list<double>(v, src, key, get_double);
    } else if (k == "target_nmse") {
      cfg.target_nmse = get_double(v, src, key);
    } else if (k == "rp_samples") {
      cfg.rp_samples = get_u64(v, src, key);
    } else if (k == "workers") {
      cfg.workers = static_cast<unsigned>(get_u64(v, src, key));
    } else if (k == "seed") {
      cfg.seed = get_u64(v, src, key);
    } else if (k == "output_dir") {
      auto s = v.value<std::string>();
      if (!s) bad_key(src, key, "expected a string");
      cfg.output_dir = *s;
    } else {
      bad_key(src, key, "unknown key");
    }
  }
}

void read_train(ExperimentConfig& cfg, const toml::table& t, const std::string& src) {
  for (auto&& [k, v] : t) {
    const std::string key = "train." + std::string(k.str());
    if (k == "hidden_layers") {
      cfg.arch.hidden_layers = static_cast<int>(get_int(v, src, key));
    } else if (k == "neurons") {
      cfg.arch.neurons = static_cast<int>(get_int(v, src, key));
    } else if (k == "n_in") {
      cfg.arch.n_in = static_cast<int>(get_int(v, src, key));
    } else if (k == "samples") {
      cfg.samples = get_u64(v, src, key);
    } else if (k == "val_fraction") {
      cfg.val_fraction = get_double(v, src, key);
    } else if (k == "learning_rate") {
      cfg.train.learning_rate = get_double(v, src, key);
    } else if (k == "batch_size") {
      cfg.train.batch_size = static_cast<int>(get_int(v, src, key));
    } else if (k == "max_epochs") {
      cfg.train.max_epochs = static_cast<int>(get_int(v, src, key));
    } else if (k == "stagnation_window") {
      cfg.train.stagnation_window = static_cast<int>(get_int(v, src, key));
    } else if (k == "stagnation_rel_tol") {
      cfg.train.stagnation_rel_tol = get_double(v, src, key);
    } else {
      bad_key(src, key, "unknown key");
    }
  }
}

void read_rp(ExperimentConfig& cfg, const toml::table& t, const std::string& src) {
  for (auto&& [k, v] : t) {
    const std::string key = "rp." + std::string(k.str());
    const double x = get_double(v, src, key);
    if (k == "rho") {
      cfg.rp.rho = x;
    } else if (k == "r0") {
      cfg.rp.R0 = x;
    } else if (k == "horizon_s") {
      cfg.rp.T = x;
    } else if (k == "rtol") {
      cfg.rp.rtol = x;
    } else if (k == "atol") {
      cfg.rp.atol = x;
    } else if (k == "drive_amplitude_pa") {
      cfg.rp.drive_amplitude = x;
    } else if (k == "drive_freq_hz") {
      cfg.rp.drive_angular_frequency = 2.0 * std::numbers::pi * x;
    } else if (k == "delta_p_pa") {
      cfg.rp.delta_p = x;
    } else if (k == "sigma") {
      cfg.rp.surface_tension = x;
    } else if (k == "mu") {
      cfg.rp.viscosity = x;
    } else if (k == "polytropic_k") {
      cfg.rp.polytropic_k = x;
    } else {
      bad_key(src, key, "unknown key");
    }
  }
}

}  // namespace

ExperimentConfig config_from_toml(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::MalformedFile, msg.str());
  }
  ExperimentConfig cfg;
  // [family] first so that param overrides see the chosen family.
  if (const toml::node* f = root.get("family")) read_family(cfg, section(*f, source, "family"), source);
  for (auto&& [k, v] : root) {
    if (k == "family") continue;
    if (k == "domain") {
      read_domain(cfg, section(v, source, "domain"), source);
    } else if (k == "sweep") {
      read_sweep(cfg, section(v, source, "sweep"), source);
    } else if (k == "train") {
      read_train(cfg, section(v, source, "train"), source);
    } else if (k == "rp") {
      read_rp(cfg, section(v, source, "rp"), source);
    } else if (k == "seed") {
      cfg.seed = get_u64(v, source, "seed");
    } else {
      bad_key(source, std::string(k.str()), "unknown section or key");
    }
  }
  validate(cfg);
  return cfg;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  const char* env = std::getenv("OSCINT_WORKERS");
  if (!env || !*env) return;
  unsigned long v = 0;
  std::string_view s(env);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 1) {
    throw Error(ErrorCode::InvalidArgument, "OSCINT_WORKERS must be a positive integer, got '" + std::string(s) + "'");
  }
  cfg.workers = static_cast<unsigned>(v);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = config_from_toml(buf.str(), path.string());
  apply_env_overrides(cfg);
  return cfg;
}

}  // namespace oscint
