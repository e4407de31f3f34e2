#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strand/config.hpp"
#include "strand/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string models_csv;
  std::string solver = "both";
  double dt = 0.0;
  int nodes_per_cell = 0;
  int continuum_nodes = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_solver = true) {
  cmd->add_option("--config", o.config_path, "configuration file (defaults built in)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--models", o.models_csv,
                  "comma-separated model ids (default: all configured)");
  if (with_solver) {
    cmd->add_option("--solver", o.solver, "discrete, continuum or both")
        ->check(CLI::IsMember({"discrete", "continuum", "both"}))
        ->capture_default_str();
  }
  cmd->add_option("--dt", o.dt, "time step override (ms)");
  cmd->add_option("--nodes-per-cell", o.nodes_per_cell,
                  "discrete mesh density override");
  cmd->add_option("--continuum-nodes", o.continuum_nodes,
                  "continuum grid size override");
}

strand::RunConfig build_config(const CommonOpts& o) {
  strand::RunConfig cfg = o.config_path.empty()
                              ? strand::default_config()
                              : strand::load_config_file(o.config_path);
  if (o.dt > 0.0) cfg.dt = o.dt;
  if (o.nodes_per_cell > 0) cfg.geometry.nodes_per_cell = o.nodes_per_cell;
  if (o.continuum_nodes > 0) cfg.continuum_nodes = o.continuum_nodes;

  if (!o.models_csv.empty()) {
    std::vector<std::string> wanted;
    std::stringstream ss(o.models_csv);
    std::string id;
    while (std::getline(ss, id, ',')) {
      if (!id.empty()) wanted.push_back(id);
    }
    for (const std::string& w : wanted) {
      if (!strand::find_model(cfg, w)) {
        throw std::invalid_argument("--models: '" + w + "' is not a configured model");
      }
    }
    std::vector<strand::ModelConfig> selected;
    for (const strand::ModelConfig& m : cfg.models) {
      for (const std::string& w : wanted) {
        if (m.id == w) {
          selected.push_back(m);
          break;
        }
      }
    }
    cfg.models = std::move(selected);
  }
  strand::validate_config(cfg);
  return cfg;
}

std::vector<std::string> requested_solvers(const std::string& solver) {
  if (solver == "both") return {"discrete", "continuum"};
  return {solver};
}

int cmd_run(const CommonOpts& o, bool no_coarse, bool no_plots, int jobs) {
  const strand::RunConfig cfg = build_config(o);
  strand::MatrixOptions opt;
  opt.out_dir = o.out_dir;
  opt.run_discrete = o.solver != "continuum";
  opt.run_continuum = o.solver != "discrete";
  opt.coarse_grid = !no_coarse;
  opt.plots = !no_plots;
  opt.jobs = jobs;

  const strand::MatrixResult res = strand::run_matrix(cfg, opt, &std::cout);

  int ok = 0, failed = 0;
  auto tally = [&](const std::vector<strand::RunStatus>& statuses) {
    for (const strand::RunStatus& st : statuses) {
      if (st.ok()) {
        ++ok;
      } else {
        ++failed;
        std::cout << "FAILED  model " << st.model_id << " " << st.solver << ": "
                  << st.error << "\n";
      }
    }
  };
  tally(res.statuses);
  tally(res.coarse_statuses);
  std::cout << ok << "/" << (ok + failed) << " runs completed; artifacts in "
            << o.out_dir << "\n";
  return res.all_ok ? 0 : 1;
}

int cmd_calibrate(const CommonOpts& o) {
  const strand::RunConfig cfg = build_config(o);
  int failures = 0;
  for (const strand::ModelConfig& m : cfg.models) {
    for (const std::string& solver : requested_solvers(o.solver)) {
      try {
        const double amp = strand::calibrate_stimulus(cfg, m, solver);
        std::cout << "model " << m.id << " " << solver << ": amplitude "
                  << amp << " uA/mm^2\n";
      } catch (const std::exception& e) {
        std::cout << "model " << m.id << " " << solver << ": " << e.what() << "\n";
        ++failures;
      }
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_tensors(const CommonOpts& o) {
  const strand::RunConfig cfg = build_config(o);
  std::filesystem::create_directories(o.out_dir);
  const std::string path = o.out_dir + "/tensors.csv";
  strand::write_tensors_csv(cfg, path);
  std::ifstream in(path);
  std::cout << in.rdbuf();
  return 0;
}

int cmd_plot(const CommonOpts& o) {
  const strand::RunConfig cfg = build_config(o);
  strand::write_plots_from_dir(cfg, o.out_dir);
  std::cout << "plots written to " << o.out_dir << "/plots\n";
  return 0;
}

int cmd_config(const CommonOpts& o) {
  const strand::RunConfig cfg = build_config(o);
  std::cout << strand::emit_config(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-resolved and homogenised simulation of action-potential "
               "propagation along a cardiac fibre strand"};
  app.require_subcommand(1);

  CommonOpts run_opts, cal_opts, ten_opts, plot_opts, cfg_opts;
  bool no_coarse = false, no_plots = false;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "run the experiment matrix and write artifacts");
  add_common(run, run_opts);
  run->add_flag("--no-coarse", no_coarse, "skip the coarse continuum grid runs");
  run->add_flag("--no-plots", no_plots, "skip SVG plot generation");
  run->add_option("--jobs", jobs, "models processed concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* cal = app.add_subcommand("calibrate", "print calibrated stimulus amplitudes");
  add_common(cal, cal_opts);

  CLI::App* ten = app.add_subcommand("tensors", "write and print the effective-tensor table");
  add_common(ten, ten_opts, /*with_solver=*/false);

  CLI::App* plot = app.add_subcommand("plot", "regenerate SVG plots from existing run CSVs");
  add_common(plot, plot_opts, /*with_solver=*/false);

  CLI::App* cfg = app.add_subcommand("config", "print the effective configuration");
  add_common(cfg, cfg_opts, /*with_solver=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts, no_coarse, no_plots, jobs);
    if (cal->parsed()) return cmd_calibrate(cal_opts);
    if (ten->parsed()) return cmd_tensors(ten_opts);
    if (plot->parsed()) return cmd_plot(plot_opts);
    if (cfg->parsed()) return cmd_config(cfg_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
