#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oscint/error.hpp"
#include "oscint/harness.hpp"
#include "text_io.hpp"

namespace oscint {
namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg;
  if (!g.config_path.empty()) {
    cfg = load_config(g.config_path);
  } else {
    apply_env_overrides(cfg);
  }
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  return cfg;
}

std::vector<double> truths_of(const Dataset& d) {
  std::vector<double> t;
  for (const Sample& s : d.samples) t.push_back(s.truth);
  return t;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural and Newton-Cotes integration of oscillatory functions", "oscint"};
  app.require_subcommand(0, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  GlobalOptions g;
  app.add_option("--config", g.config_path, "TOML experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--out", g.out_dir, "Output directory (overrides the config)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a dataset CSV");
  std::string gen_family;
  std::optional<std::size_t> gen_samples;
  std::optional<int> gen_n_in;
  gen->add_option("--family", gen_family, "Integrand family (default: config)");
  gen->add_option("-m,--samples", gen_samples, "Number of samples");
  gen->add_option("--n-in", gen_n_in, "Network inputs per sample");

  // train
  auto* tr = app.add_subcommand("train", "Train a network and save it");
  std::string tr_data;
  std::optional<int> tr_h, tr_n, tr_epochs;
  std::optional<double> tr_lr;
  tr->add_option("--data", tr_data, "Dataset CSV (default: generate from the config)")->check(CLI::ExistingFile);
  tr->add_option("-H,--hidden-layers", tr_h, "Hidden layers");
  tr->add_option("-N,--neurons", tr_n, "Neurons per hidden layer");
  tr->add_option("--lr", tr_lr, "Learning rate");
  tr->add_option("--epochs", tr_epochs, "Maximum epochs");

  // eval
  auto* ev = app.add_subcommand("eval", "Print the NMSE of a saved model on a dataset");
  std::string ev_model, ev_data;
  ev->add_option("--model", ev_model, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ev_data, "Dataset CSV")->required()->check(CLI::ExistingFile);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Classical and network sweeps over n_q");
  bool sw_osc = false;
  sw->add_flag("--oscillatoriness", sw_osc, "Sweep alpha over oscillatoriness levels instead");

  // search
  auto* se = app.add_subcommand("search", "Grid search over the architecture and training settings");

  // table2
  auto* t2 = app.add_subcommand("table2", "FLOP gain per family at the target NMSE");

  // flops
  auto* fl = app.add_subcommand("flops", "Print FLOP or memory counts");
  std::string fl_rule;
  bool fl_nn = false, fl_exact = false, fl_memory = false;
  std::optional<std::uint64_t> fl_nq, fl_n, fl_h, fl_l;
  auto* fl_rule_opt = fl->add_option("--rule", fl_rule, "trapezoid, midpoint or simpson");
  auto* fl_nn_opt = fl->add_flag("--nn", fl_nn, "Network inference cost");
  auto* fl_mem_opt = fl->add_flag("--memory", fl_memory, "Parameter memory in bytes");
  fl->add_flag("--exact", fl_exact, "Literal per-inference operation count instead of (4N+2) N^2 H (1+n_q)");
  fl->add_option("--nq", fl_nq, "Quadrature points / network inputs");
  fl->add_option("-N,--neurons", fl_n, "Neurons per layer");
  fl->add_option("-H,--hidden-layers", fl_h, "Hidden layers");
  fl->add_option("-L,--layers", fl_l, "Layers (memory model)");
  fl_rule_opt->excludes(fl_nn_opt)->excludes(fl_mem_opt);
  fl_nn_opt->excludes(fl_mem_opt);

  // rp-solve
  auto* rp = app.add_subcommand("rp-solve", "Solve the bubble equation and write the trajectory");
  std::optional<double> rp_rho;
  rp->add_option("--rho", rp_rho, "Liquid density");

  // Set after the subcommands exist so only the top level tolerates extras.
  app.allow_extras(true);
  try {
    app.parse(argc, argv);
    if (app.get_subcommands().empty()) {
      const auto extras = app.remaining();
      err << "error: " << (extras.empty() ? std::string("a subcommand is required")
                                          : "unknown subcommand or argument '" + extras.front() + "'")
          << "\n\n" << app.help();
      return 1;
    }
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  auto usage = [&](CLI::App* sub, const std::string& msg) {
    err << "error: " << msg << "\n\n" << sub->help();
    return 1;
  };

  try {
    if (fl->parsed()) {
      if (!fl_rule.empty()) {
        if (!fl_nq) return usage(fl, "--rule needs --nq");
        Rule rule;
        try {
          rule = parse_rule(fl_rule);
        } catch (const Error& e) {
          return usage(fl, std::string("--rule: ") + e.what());
        }
        out << flop_cost(rule, *fl_nq) << '\n';
      } else if (fl_nn) {
        if (!fl_nq || !fl_n || !fl_h) return usage(fl, "--nn needs -N, -H and --nq");
        out << nn_flops(*fl_n, *fl_h, *fl_nq, fl_exact ? FlopMode::Exact : FlopMode::Paper) << '\n';
      } else if (fl_memory) {
        if (!fl_n || !fl_l) return usage(fl, "--memory needs -N and -L");
        out << memory_bytes(*fl_n, *fl_l) << '\n';
      } else {
        return usage(fl, "one of --rule, --nn or --memory is required");
      }
      return 0;
    }

    ExperimentConfig cfg = resolve_config(g);
    const auto& dir = cfg.output_dir;

    if (gen->parsed()) {
      if (!gen_family.empty()) {
        const Family f = parse_family(gen_family);
        if (f != cfg.family) cfg.param_space.reset();
        cfg.family = f;
      }
      const std::size_t m = gen_samples.value_or(cfg.samples_for(cfg.family));
      const int n_in = gen_n_in.value_or(cfg.arch.n_in);
      GenerationOptions opts;
      opts.resample_factor = cfg.resample_factor;
      opts.workers = cfg.workers;
      const Dataset ds = build_dataset(cfg.spec(), m, n_in, derive_seed(cfg.seed, to_string(cfg.family)), opts);
      const auto path = dir / (std::string(to_string(cfg.family)) + "_n" + std::to_string(n_in) + ".csv");
      std::filesystem::create_directories(dir);
      write_csv(ds, path);
      out << path.string() << '\n';
      return 0;
    }

    if (tr->parsed()) {
      if (tr_h) cfg.arch.hidden_layers = *tr_h;
      if (tr_n) cfg.arch.neurons = *tr_n;
      if (tr_lr) cfg.train.learning_rate = *tr_lr;
      if (tr_epochs) cfg.train.max_epochs = *tr_epochs;
      validate(cfg);
      Dataset ds;
      if (!tr_data.empty()) {
        ds = read_csv(tr_data);
      } else {
        GenerationOptions opts;
        opts.resample_factor = cfg.resample_factor;
        opts.workers = cfg.workers;
        ds = build_dataset(cfg.spec(), cfg.samples_for(cfg.family), cfg.arch.n_in,
                           derive_seed(cfg.seed, to_string(cfg.family)), opts);
      }
      const SplitDataset parts = split(ds, cfg.ratios(), derive_seed(ds.seed, "split"));
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, "train");
      const TrainResult res = train(init({ds.n_in, cfg.arch.hidden_layers, cfg.arch.neurons}, tc.seed), parts, tc);
      std::filesystem::create_directories(dir);
      const auto path = dir / "model.txt";
      save(res.net, path);
      const double test = normalized_mse(predict(res.net, parts.test), truths_of(parts.test));
      out << "epochs " << res.report.epochs_run << " best_epoch " << res.report.best_epoch << '\n'
          << "train_nmse " << text::format_double(res.report.final_train_nmse) << '\n'
          << "val_nmse " << text::format_double(res.report.final_val_nmse) << '\n'
          << "test_nmse " << text::format_double(test) << '\n'
          << path.string() << '\n';
      return 0;
    }

    if (ev->parsed()) {
      const MlpNetwork net = load(ev_model);
      const Dataset ds = read_csv(ev_data);
      out << text::format_double(normalized_mse(predict(net, ds), truths_of(ds))) << '\n';
      return 0;
    }

    if (sw->parsed()) {
      std::filesystem::create_directories(dir);
      if (sw_osc) {
        const auto grid = cfg.oscillatoriness_grid.empty() ? default_oscillatoriness_grid(cfg.family)
                                                           : cfg.oscillatoriness_grid;
        const auto points = alpha_vs_oscillatoriness(cfg, cfg.family, grid, cfg.target_nmse);
        const auto path = dir / "alpha_vs_oscillatoriness.csv";
        emit_oscillatoriness(points, path);
        for (const auto& p : points) {
          out << text::format_double(p.parameter) << ' ' << text::format_double(p.alpha) << ' ' << p.status << '\n';
        }
        out << path.string() << '\n';
        return 0;
      }
      const SweepReport report = run_sweep(cfg);
      const auto path = dir / "sweep.csv";
      emit_report(report, path);
      out << path.string() << '\n';
      return 0;
    }

    if (se->parsed()) {
      const SearchResult r = hyperparameter_search(cfg);
      std::filesystem::create_directories(dir);
      const auto path = dir / "search.csv";
      emit_search_table(r, path);
      out << "best H=" << r.best.hidden_layers << " N=" << r.best.neurons << " lr=" << r.learning_rate
          << " samples=" << r.samples << " val_fraction=" << r.val_fraction
          << " val_nmse=" << text::format_double(r.best_val_nmse) << (r.feasible ? "" : " (infeasible)") << '\n'
          << path.string() << '\n';
      if (!r.feasible) {
        err << "error: NoFeasibleArch: no architecture reached validation NMSE " << cfg.target_nmse << '\n';
        return 2;
      }
      return 0;
    }

    if (t2->parsed()) {
      const Table2Result r = reproduce_table2(cfg);
      std::filesystem::create_directories(dir);
      emit_table2(r.rows, dir / "table2.csv");
      emit_report(r.report, dir / "table2_sweep.csv");
      out << "family alpha paper_alpha status\n";
      for (const Table2Row& row : r.rows) {
        out << to_string(row.family) << ' ' << text::format_double(row.alpha) << ' '
            << text::format_double(row.paper_alpha) << ' ' << row.status << '\n';
      }
      out << (dir / "table2.csv").string() << '\n';
      return 0;
    }

    if (rp->parsed()) {
      RpConfig rc = cfg.rp;
      if (rp_rho) rc.rho = *rp_rho;
      const RpTrajectory traj = rp_solve(rc);
      std::filesystem::create_directories(dir);
      const auto path = dir / "rp_trajectory.csv";
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
      f << "t,R,V\n";
      for (std::size_t i = 0; i < traj.times.size(); ++i) {
        f << text::format_double(traj.times[i]) << ',' << text::format_double(traj.radii[i]) << ','
          << text::format_double(traj.radial_velocities[i]) << '\n';
      }
      if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
      out << "steps " << traj.times.size() << " rejected " << traj.rejected_steps << '\n'
          << "radius_integral " << text::format_double(traj.radius_integral) << '\n'
          << path.string() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace oscint
