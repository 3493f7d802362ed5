#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oscint/error.hpp"
#include "oscint/harness.hpp"

using namespace oscint;
namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an oscint::Error");
  return ErrorCode::InvalidArgument;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "oscint_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(Family family) {
  ExperimentConfig cfg;
  cfg.family = family;
  cfg.samples = 300;
  cfg.rp_samples = 30;
  cfg.n_q_sweep = {1, 2, 4, 8, 16, 32, 64, 128, 1024};
  cfg.nn_n_q_sweep = {1, 4};
  cfg.train.max_epochs = 30;
  cfg.train.learning_rate = 1e-3;
  cfg.seed = 5;
  return cfg;
}

const SweepRow& find_row(const SweepReport& r, Method m, int n_q) {
  for (const SweepRow& row : r) {
    if (row.method == m && row.n_q == n_q) return row;
  }
  FAIL("row not found");
  return r.front();
}

struct Cli {
  int rc;
  std::string out, err;
};

Cli run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"oscint"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config defaults mirror the search space") {
  const ExperimentConfig cfg;
  CHECK(cfg.hidden_layers_grid == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(cfg.neurons_grid == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
  CHECK(cfg.samples_grid == std::vector<std::size_t>{100, 1000, 10000});
  CHECK(cfg.learning_rate_grid == std::vector<double>{1e-5, 1e-4, 1e-3});
  CHECK(cfg.val_fraction_grid == std::vector<double>{0.1, 0.15, 0.2});
  CHECK(cfg.n_q_sweep.size() == 14);
  CHECK(cfg.n_q_sweep.back() == 8192);
  CHECK(cfg.samples == 10000);
  CHECK(cfg.target_nmse == 1e-3);
  CHECK(cfg.train.learning_rate == 1e-4);
  CHECK(cfg.ratios().train == doctest::Approx(0.8));
}

TEST_CASE("config from toml") {
  const ExperimentConfig cfg = config_from_toml(R"(
seed = 3
[family]
name = "ew1"
params = [[6.0, 12.0], [30, 60]]
resample_factor = 0.001
[domain]
s1 = -1.0
s2 = 2.0
[sweep]
n_q = [2, 4, 8]
nn_n_q = [1, 2]
hidden_layers = [1, 3]
neurons = [5]
samples = [100]
learning_rates = [1e-3]
val_fractions = [0.15]
oscillatoriness = [5.0, 10.0]
target_nmse = 0.01
rp_samples = 50
workers = 2
[train]
hidden_layers = 2
neurons = 4
n_in = 8
samples = 500
val_fraction = 0.15
learning_rate = 0.001
batch_size = 32
max_epochs = 10
stagnation_window = 5
stagnation_rel_tol = 0.001
[rp]
rho = 800
r0 = 3e-6
horizon_s = 5e-5
rtol = 1e-7
atol = 1e-11
drive_amplitude_pa = 1e6
drive_freq_hz = 20000
delta_p_pa = -5000
sigma = 0.07
mu = 1e-3
polytropic_k = 1.4
)");
  CHECK(cfg.seed == 3);
  CHECK(cfg.family == Family::EvanWebster1);
  REQUIRE(cfg.param_space);
  CHECK(cfg.param_space->intervals[1].hi == 60.0);
  CHECK(cfg.resample_factor == 0.001);
  CHECK(cfg.domain.s1 == -1.0);
  CHECK(cfg.n_q_sweep == std::vector<int>{2, 4, 8});
  CHECK(cfg.hidden_layers_grid == std::vector<int>{1, 3});
  CHECK(cfg.oscillatoriness_grid == std::vector<double>{5.0, 10.0});
  CHECK(cfg.target_nmse == 0.01);
  CHECK(cfg.workers == 2);
  CHECK(cfg.arch == Architecture{8, 2, 4});
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.rp.R0 == 3e-6);
  CHECK(cfg.rp.drive_angular_frequency == doctest::Approx(2 * M_PI * 20000));
  CHECK(cfg.rp.polytropic_k == 1.4);
  CHECK(cfg.spec().space == *cfg.param_space);
  CHECK(cfg.spec_for(Family::Sine).space == default_param_space(Family::Sine));
}

TEST_CASE("config errors") {
  CHECK(code_of([] { config_from_toml("[train]\nlearning_rat = 1"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { config_from_toml("[bogus]\nx = 1"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { config_from_toml("[train\nx = 1"); }) == ErrorCode::MalformedFile);
  CHECK(code_of([] { config_from_toml("[family]\nname = \"sine\"\nparams = [[1, 2], [3, 4]]"); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { config_from_toml("[domain]\ns1 = 2.0\ns2 = 1.0"); }) == ErrorCode::InvalidDomain);
  CHECK(code_of([] { config_from_toml("[train]\nmax_epochs = 1.5"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { load_config("/nonexistent/oscint.toml"); }) == ErrorCode::IoFailure);
}

TEST_CASE("worker count environment override") {
  ExperimentConfig cfg;
  setenv("OSCINT_WORKERS", "3", 1);
  apply_env_overrides(cfg);
  CHECK(cfg.workers == 3);
  setenv("OSCINT_WORKERS", "zero", 1);
  CHECK(code_of([&] { apply_env_overrides(cfg); }) == ErrorCode::InvalidArgument);
  unsetenv("OSCINT_WORKERS");
}

TEST_CASE("quadrature sweep") {
  const ExperimentConfig cfg = small_config(Family::Exponential);
  const SweepReport r = run_quadrature_sweep(cfg);
  CHECK(r.size() == 3 * cfg.n_q_sweep.size());
  CHECK(find_row(r, Method::Trapezoid, 1024).test_nmse <= 1e-6);
  for (const SweepRow& row : r) {
    const auto n = static_cast<std::uint64_t>(row.n_q);
    const Rule rule = row.method == Method::Trapezoid ? Rule::Trapezoid
                      : row.method == Method::Midpoint ? Rule::Midpoint
                                                       : Rule::Simpson;
    CHECK(row.flops_paper == flop_cost(rule, n));
    CHECK(row.flops_exact == row.flops_paper);
    CHECK(row.hidden_layers == 0);
    if (rule == Rule::Simpson && n % 2 == 1) {
      CHECK(row.status == "simpson_odd_count");
      CHECK(std::isnan(row.test_nmse));
    } else {
      CHECK(row.status == "ok");
    }
  }
  // Nonincreasing error on a smooth integrand once asymptotic.
  for (int n : {4, 8, 16, 32, 64}) {
    CHECK(find_row(r, Method::Trapezoid, 2 * n).test_nmse <= find_row(r, Method::Trapezoid, n).test_nmse);
    CHECK(find_row(r, Method::Simpson, 2 * n).test_nmse <= find_row(r, Method::Simpson, n).test_nmse);
  }

  const SweepReport sine = run_quadrature_sweep(small_config(Family::Sine));
  CHECK(find_row(sine, Method::Trapezoid, 1).test_nmse >= 1e-2);
}

TEST_CASE("classical and network sweeps share test functions") {
  const ExperimentConfig cfg = small_config(Family::Sine);
  const ExperimentData data = prepare_data(cfg, cfg.spec(), cfg.samples, cfg.nn_n_q_sweep);
  const SplitDataset a = data.splits(1);
  const SplitDataset b = data.splits(4);
  REQUIRE(a.test.size() == b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test.samples[i].params == b.test.samples[i].params);
}

TEST_CASE("network sweep") {
  ExperimentConfig cfg = small_config(Family::Sine);
  const SweepReport a = run_nn_sweep(cfg);
  REQUIRE(a.size() == 2);
  CHECK(a[0].n_q == 1);
  CHECK(std::isfinite(a[0].test_nmse));
  CHECK(a[0].epochs > 0);
  CHECK(a[1].flops_paper == nn_flops(5, 3, 4));
  CHECK(a[1].flops_exact == nn_flops(5, 3, 4, FlopMode::Exact));
  cfg.workers = 2;
  CHECK(format_report(run_nn_sweep(cfg)) == format_report(a));
}

TEST_CASE("sweep report files are deterministic and round trip") {
  const ExperimentConfig cfg = small_config(Family::Bessel);
  const fs::path dir = temp_dir("report");
  emit_report(run_sweep(cfg), dir / "a.csv");
  emit_report(run_sweep(cfg), dir / "b.csv");
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  const SweepReport parsed = parse_report(dir / "a.csv");
  CHECK(format_report(parsed) == a);
  CHECK(a.find("simpson,1,0,0,7,7,nan,nan,nan,0,5,simpson_odd_count") != std::string::npos);
}

TEST_CASE("report format") {
  const fs::path dir = temp_dir("empty_report");
  emit_report({}, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") ==
        "family,method,n_q,hidden_layers,neurons,flops_paper,flops_exact,train_nmse,val_nmse,test_nmse,epochs,seed,"
        "status\n");
  CHECK(parse_report(dir / "empty.csv").empty());

  SweepReport r{{Family::Sine, Method::NeuralNet, 4, 3, 5, 16500, 131, 0.1, 0.2, 0.30000000000000004, 12, 9, "ok"},
                {Family::Bessel, Method::Midpoint, 2, 0, 0, 7, 7, 1e-300, 2.5, 3, 0, 9, "ok"},
                {Family::Bessel, Method::NeuralNet, 2, 1, 1, 36, 9, 1, 1, 1, 1, 9, "diverged"}};
  emit_report(r, dir / "r.csv");
  const SweepReport back = parse_report(dir / "r.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[0].family == Family::Bessel);
  CHECK(back[0].method == Method::NeuralNet);
  CHECK(back[1].method == Method::Midpoint);
  CHECK(back[2].test_nmse == 0.30000000000000004);
  CHECK(back[1].train_nmse == 1e-300);

  CHECK(code_of([] { parse_report_text("a,b\n"); }) == ErrorCode::SchemaMismatch);
  const std::string header =
      "family,method,n_q,hidden_layers,neurons,flops_paper,flops_exact,train_nmse,val_nmse,test_nmse,epochs,seed,"
      "status\n";
  CHECK(code_of([&] { parse_report_text(header + "sine,nn,1\n"); }) == ErrorCode::MalformedFile);
  CHECK(code_of([&] { parse_report_text(header + "sine,nn,x,1,1,1,1,1,1,1,1,1,ok\n"); }) == ErrorCode::MalformedFile);
  CHECK(code_of([] { parse_report_text(""); }) == ErrorCode::MalformedFile);
}

TEST_CASE("hyperparameter search") {
  ExperimentConfig cfg = small_config(Family::Sine);
  cfg.hidden_layers_grid = {1, 2};
  cfg.neurons_grid = {2, 3};
  cfg.samples_grid = {100, 300};
  cfg.learning_rate_grid = {1e-3};
  cfg.val_fraction_grid = {0.1};
  cfg.target_nmse = 1e9;
  const SearchResult r = hyperparameter_search(cfg);
  CHECK(r.table.size() == 8);
  CHECK(r.feasible);
  // Every cell is feasible, so the fewest paper-mode FLOPs wins.
  CHECK(r.best.hidden_layers == 1);
  CHECK(r.best.neurons == 2);

  cfg.hidden_layers_grid = {2};
  cfg.neurons_grid = {3};
  cfg.samples_grid = {300};
  const SearchResult single = hyperparameter_search(cfg);
  CHECK(single.best == Architecture{16, 2, 3});

  cfg.target_nmse = 0.0;
  const SearchResult none = hyperparameter_search(cfg);
  CHECK_FALSE(none.feasible);
  CHECK(code_of([&] { hyperparameter_search_strict(cfg); }) == ErrorCode::NoFeasibleArch);

  const fs::path dir = temp_dir("search");
  emit_search_table(r, dir / "search.csv");
  CHECK(slurp(dir / "search.csv").find(",learning_rate,samples,val_fraction,feasible\n") != std::string::npos);
}

TEST_CASE("table and oscillatoriness plumbing") {
  ExperimentConfig cfg = small_config(Family::Sine);
  const Family fams[] = {Family::Exponential, Family::RayleighPlesset};
  const Table2Result t = reproduce_table2(cfg, fams);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].paper_alpha == 0.60);
  CHECK(t.rows[1].paper_alpha == 23.46);
  for (const Table2Row& row : t.rows) {
    if (row.status == "ok") {
      CHECK(row.alpha == alpha(row.flops_nn, row.flops_qm));
    } else {
      CHECK(std::isnan(row.alpha));
    }
  }
  const fs::path dir = temp_dir("table2");
  emit_table2(t.rows, dir / "t.csv");
  CHECK(slurp(dir / "t.csv").rfind("family,target_nmse,flops_nn,flops_qm,best_rule,alpha,gain,paper_alpha,status\n", 0) ==
        0);

  const std::vector<double> one{10.0};
  const auto pts = alpha_vs_oscillatoriness(cfg, Family::Sine, one, 1e-3);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].parameter == 10.0);

  const auto grid = default_oscillatoriness_grid(Family::Sine);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(5.0));
  CHECK(grid.back() == doctest::Approx(60.0));
}

TEST_CASE("cli flops") {
  Cli c = run_cli({"flops", "--rule", "trapezoid", "--nq", "8"});
  CHECK(c.rc == 0);
  CHECK(c.out == "17\n");
  c = run_cli({"flops", "--nn", "-N", "5", "-H", "3", "--nq", "7"});
  CHECK(c.rc == 0);
  CHECK(c.out == "13200\n");
  c = run_cli({"flops", "--memory", "-N", "3", "-L", "5"});
  CHECK(c.out == "180\n");
  c = run_cli({"flops", "--rule", "gauss", "--nq", "8"});
  CHECK(c.rc == 1);
  CHECK(c.err.find("--rule") != std::string::npos);
}

TEST_CASE("cli usage errors") {
  Cli c = run_cli({"frobnicate"});
  CHECK(c.rc == 1);
  CHECK(c.err.find("frobnicate") != std::string::npos);
  CHECK(c.err.find("Subcommands") != std::string::npos);
  c = run_cli({});
  CHECK(c.rc == 1);
  c = run_cli({"flops", "--bogus"});
  CHECK(c.rc == 1);
  CHECK(c.err.find("--bogus") != std::string::npos);
  c = run_cli({"--help"});
  CHECK(c.rc == 0);
}

TEST_CASE("cli data, train and eval") {
  const fs::path dir = temp_dir("cli");
  const fs::path cfg = dir / "cfg.toml";
  std::ofstream(cfg) << "[train]\nsamples = 200\nn_in = 4\nmax_epochs = 20\nlearning_rate = 1e-3\n";
  Cli gen = run_cli({"--config", cfg.string(), "--out", dir.string(), "--seed", "4", "gen-data", "--family", "sine"});
  REQUIRE(gen.rc == 0);
  const fs::path data = dir / "sine_n4.csv";
  CHECK(fs::exists(data));
  Cli tr = run_cli({"--config", cfg.string(), "--out", dir.string(), "train", "--data", data.string(), "-H", "2"});
  REQUIRE(tr.rc == 0);
  CHECK(tr.out.find("test_nmse") != std::string::npos);
  Cli ev = run_cli({"eval", "--model", (dir / "model.txt").string(), "--data", data.string()});
  CHECK(ev.rc == 0);
  CHECK(std::isfinite(std::stod(ev.out)));
  Cli bad = run_cli({"eval", "--model", data.string(), "--data", data.string()});
  CHECK(bad.rc == 2);
  CHECK(bad.err.find("CorruptModel") != std::string::npos);
}

TEST_CASE("cli rp-solve") {
  const fs::path dir = temp_dir("cli_rp");
  Cli c = run_cli({"--out", dir.string(), "rp-solve", "--rho", "750"});
  CHECK(c.rc == 0);
  const std::string csv = slurp(dir / "rp_trajectory.csv");
  CHECK(csv.rfind("t,R,V\n0,2.6000000000000001e-06,0\n", 0) == 0);
}
