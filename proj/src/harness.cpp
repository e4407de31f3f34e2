#include "strand/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "strand/continuum_solver.hpp"
#include "strand/discrete_solver.hpp"
#include "strand/homogenisation.hpp"
#include "strand/svg_plot.hpp"
#include "strand/text_io.hpp"

namespace fs = std::filesystem;

namespace strand {

namespace {

Conductivities conductivities_for(const RunConfig& cfg, const ModelConfig& m) {
  return Conductivities{cfg.sigma_i, m.sigma_g, cfg.sigma_e};
}

MembraneModel membrane_for(const RunConfig& cfg, const ModelConfig& m) {
  return MembraneModel{cfg.c_m, m.c_g, m.i_g};
}

StimulusSpec stimulus_for(const RunConfig& cfg, double amplitude) {
  StimulusSpec stim;
  stim.amplitude = amplitude;
  stim.t_on = cfg.stim_on;
  stim.t_off = cfg.stim_off;
  stim.x_max = cfg.geometry.L;
  return stim;
}

// calibration probes only need the wave to clear x = 2 mm, so they stop
// well short of t_end
double probe_t_end(const RunConfig& cfg) { return cfg.stim_off + 12.0; }

constexpr double kWatchX = 2.0;

template <class System, class Stepper>
double calibrate_with(const System& sys, Stepper& stepper, const RunConfig& cfg,
                      const std::string& label) {
  auto probe = [&](double amp) {
    const StimulusSpec stim = stimulus_for(cfg, amp);
    return propagates(sys, stepper, stim, probe_t_end(cfg), kWatchX);
  };
  double lo = 0.0, hi = 0.0;
  for (int p = 0; p <= 11; ++p) {
    const double amp = std::ldexp(1.0, p);
    if (probe(amp)) {
      hi = amp;
      lo = (p == 0) ? 0.0 : amp / 2;
      break;
    }
  }
  if (hi == 0.0) {
    throw std::runtime_error(label + ": inexcitable configuration "
                             "(no propagation at amplitude 2048)");
  }
  for (int it = 0; it < 12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 1.5 * hi;
}

std::string snapshot_filename(double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "snapshot_%gms.csv", t);
  return buf;
}

void write_record_files(const SimulationRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  write_traces_csv(rec, (dir / "traces.csv").string());
  for (const Snapshot& s : rec.snapshots) {
    write_snapshot_csv(s, (dir / snapshot_filename(s.t)).string());
  }
}

}  // namespace

double calibrate_stimulus(const RunConfig& cfg, const ModelConfig& model,
                          const std::string& solver) {
  const std::string label = "model " + model.id + " (" + solver + ")";
  if (solver == "discrete") {
    const DiscreteSystem sys(build_mesh(cfg.geometry), conductivities_for(cfg, model),
                             membrane_for(cfg, model));
    DiscreteStepper stepper(sys, cfg.dt);
    return calibrate_with(sys, stepper, cfg, label);
  }
  if (solver == "continuum") {
    const ContinuumSystem sys = make_continuum_system(
        cfg.geometry,
        analytic_tensors(cfg.geometry, cfg.sigma_i, model.sigma_g, cfg.sigma_e),
        membrane_for(cfg, model), cfg.continuum_nodes);
    ContinuumStepper stepper(sys, cfg.dt);
    return calibrate_with(sys, stepper, cfg, label);
  }
  throw std::invalid_argument("calibrate_stimulus: unknown solver '" + solver + "'");
}

SimulationRecord execute_run(const RunConfig& cfg, const ModelConfig& model,
                             const std::string& solver, double amplitude) {
  const StimulusSpec stim = stimulus_for(cfg, amplitude);
  SimulationRecord rec;
  if (solver == "discrete") {
    const DiscreteSystem sys(build_mesh(cfg.geometry), conductivities_for(cfg, model),
                             membrane_for(cfg, model));
    rec = run_discrete(sys, stim, cfg.t_end, cfg.dt, ProbeSpec{});
  } else if (solver == "continuum" || solver == "continuum80") {
    const int nodes = solver == "continuum" ? cfg.continuum_nodes
                                            : cfg.continuum_nodes_coarse;
    const ContinuumSystem sys = make_continuum_system(
        cfg.geometry,
        analytic_tensors(cfg.geometry, cfg.sigma_i, model.sigma_g, cfg.sigma_e),
        membrane_for(cfg, model), nodes);
    rec = run_continuum(sys, stim, cfg.t_end, cfg.dt, ProbeSpec{});
    rec.meta.solver = solver;
  } else {
    throw std::invalid_argument("execute_run: unknown solver '" + solver + "'");
  }
  rec.meta.model_id = model.id;
  return rec;
}

void write_tensors_csv(const RunConfig& cfg, const std::string& path) {
  std::string body =
      "model,sigma_i_analytic_mS_mm,sigma_i_numeric_mS_mm,sigma_i_rel_diff,"
      "sigma_e_mS_mm,chi_i_per_mm,chi_g_per_mm\n";
  for (const ModelConfig& m : cfg.models) {
    const EffectiveTensors a =
        analytic_tensors(cfg.geometry, cfg.sigma_i, m.sigma_g, cfg.sigma_e);
    const EffectiveTensors n =
        numeric_tensors(cfg.geometry, cfg.sigma_i, m.sigma_g, cfg.sigma_e);
    const double rel =
        std::abs(n.sigma_i(0, 0) - a.sigma_i(0, 0)) / a.sigma_i(0, 0);
    body += m.id + "," + format_double(a.sigma_i(0, 0)) + "," +
            format_double(n.sigma_i(0, 0)) + "," + format_double(rel) + "," +
            format_double(a.sigma_e(0, 0)) + "," + format_double(a.chi_i) + "," +
            format_double(a.chi_g) + "\n";
  }
  atomic_write_file(path, body);
}

namespace {

struct Slot {
  RunStatus status;
  SimulationRecord rec;
  bool has_rec = false;
};

// profile of the snapshot nearest t, as a plot series
bool profile_series(const SimulationRecord& rec, double t, const std::string& label,
                    Series& out) {
  const Snapshot* s = snapshot_at(rec, t);
  if (!s) return false;
  out = Series{};
  out.label = label;
  snapshot_profile(*s, out.x, out.y);
  return true;
}

std::string model_label(const std::string& id) {
  return id == "Base" ? id : "model " + id;
}

void write_matrix_plots(const RunConfig& cfg, const std::vector<const SimulationRecord*>& recs,
                        const fs::path& plots_dir) {
  fs::create_directories(plots_dir);
  const double len = cfg.geometry.n_cells * cfg.geometry.L;

  auto find_rec = [&](const std::string& id, const std::string& solver)
      -> const SimulationRecord* {
    for (const SimulationRecord* r : recs) {
      if (r->meta.model_id == id && r->meta.solver == solver) return r;
    }
    return nullptr;
  };

  for (const ModelConfig& m : cfg.models) {
    // per-model snapshot overlay, both solvers at both times
    std::vector<Series> snaps;
    for (const std::string solver : {"discrete", "continuum"}) {
      const SimulationRecord* r = find_rec(m.id, solver);
      if (!r) continue;
      for (double t : {15.0, 30.0}) {
        Series s;
        char label[48];
        std::snprintf(label, sizeof label, "%s %g ms", solver.c_str(), t);
        if (profile_series(*r, t, label, s)) snaps.push_back(std::move(s));
      }
    }
    if (!snaps.empty()) {
      PlotSpec spec;
      spec.title = model_label(m.id) + ": snapshots";
      spec.x_label = "x (mm)";
      spec.y_label = "v (mV)";
      spec.x_min = 0.0;
      spec.x_max = len;
      spec.y_min = -100.0;
      spec.y_max = 40.0;
      write_svg_plot((plots_dir / ("snapshots_" + m.id + ".svg")).string(), spec,
                     snaps);
    }

    // per-model probe traces at the cv stations
    std::vector<Series> traces;
    for (const std::string solver : {"discrete", "continuum"}) {
      const SimulationRecord* r = find_rec(m.id, solver);
      if (!r) continue;
      for (double station : {2.5, 7.5}) {
        const ProbeTrace* best = nullptr;
        for (const ProbeTrace& p : r->probes) {
          if (!best || std::abs(p.x - station) < std::abs(best->x - station)) {
            best = &p;
          }
        }
        if (!best) continue;
        Series s;
        char label[64];
        std::snprintf(label, sizeof label, "%s x = %g mm", solver.c_str(),
                      station);
        s.label = label;
        s.x = r->times;
        s.y = best->v;
        traces.push_back(std::move(s));
      }
    }
    if (!traces.empty()) {
      PlotSpec spec;
      spec.title = model_label(m.id) + ": probe traces";
      spec.x_label = "t (ms)";
      spec.y_label = "v (mV)";
      spec.x_min = 0.0;
      spec.x_max = cfg.t_end;
      spec.y_min = -100.0;
      spec.y_max = 40.0;
      write_svg_plot((plots_dir / ("traces_" + m.id + ".svg")).string(), spec,
                     traces);
    }
  }

  // all-model overlays at 30 ms, full domain and zoomed onto the fronts
  for (const std::string solver : {"discrete", "continuum"}) {
    std::vector<Series> overlay;
    for (const ModelConfig& m : cfg.models) {
      const SimulationRecord* r = find_rec(m.id, solver);
      if (!r) continue;
      Series s;
      if (profile_series(*r, 30.0, model_label(m.id), s)) {
        overlay.push_back(std::move(s));
      }
    }
    if (overlay.empty()) continue;
    PlotSpec spec;
    spec.title = "30 ms snapshots, " + solver + " solver";
    spec.x_label = "x (mm)";
    spec.y_label = "v (mV)";
    spec.x_min = 0.0;
    spec.x_max = len;
    spec.y_min = -100.0;
    spec.y_max = 40.0;
    write_svg_plot((plots_dir / ("overlay_30ms_" + solver + ".svg")).string(),
                   spec, overlay);
    spec.title += " (zoom)";
    spec.x_min = 6.0;
    spec.x_max = 7.5;
    write_svg_plot(
        (plots_dir / ("overlay_30ms_zoom_" + solver + ".svg")).string(), spec,
        overlay);
  }
}

}  // namespace

MatrixResult run_matrix(const RunConfig& cfg, const MatrixOptions& opt,
                        std::ostream* progress) {
  validate_config(cfg);
  const fs::path out(opt.out_dir);
  fs::create_directories(out);

  std::vector<std::string> solvers;
  if (opt.run_discrete) solvers.push_back("discrete");
  if (opt.run_continuum) solvers.push_back("continuum");
  if (solvers.empty()) throw std::invalid_argument("run_matrix: no solver selected");
  const bool coarse = opt.coarse_grid && opt.run_continuum;

  const std::size_t n_models = cfg.models.size();
  std::vector<Slot> slots(n_models * solvers.size());
  std::vector<Slot> coarse_slots(coarse ? n_models : 0);
  std::mutex progress_mutex;

  auto report = [&](const RunStatus& st) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    if (st.ok()) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "model %-4s %-11s amplitude=%-10.6g cv=%.6g mm/ms\n",
                    st.model_id.c_str(), st.solver.c_str(), st.amplitude,
                    st.row.cv);
      *progress << line;
    } else {
      *progress << "model " << st.model_id << " " << st.solver
                << " FAILED: " << st.error << "\n";
    }
    progress->flush();
  };

  auto run_one = [&](const ModelConfig& m, const std::string& solver,
                     double amplitude, Slot& slot) {
    slot.status.model_id = m.id;
    slot.status.solver = solver;
    try {
      slot.status.amplitude = amplitude;
      SimulationRecord rec = execute_run(cfg, m, solver, amplitude);
      write_record_files(rec, out / m.id / solver);
      slot.status.row = analyse_record(rec, cfg.geometry);
      slot.rec = std::move(rec);
      slot.has_rec = true;
    } catch (const std::exception& e) {
      slot.status.error = e.what();
    }
    report(slot.status);
  };

  auto process_model = [&](std::size_t mi) {
    const ModelConfig& m = cfg.models[mi];
    double continuum_amp = 0.0;
    bool continuum_ok = false;
    for (std::size_t si = 0; si < solvers.size(); ++si) {
      Slot& slot = slots[mi * solvers.size() + si];
      double amp = 0.0;
      try {
        amp = calibrate_stimulus(cfg, m, solvers[si]);
      } catch (const std::exception& e) {
        slot.status.model_id = m.id;
        slot.status.solver = solvers[si];
        slot.status.error = e.what();
        report(slot.status);
        continue;
      }
      run_one(m, solvers[si], amp, slot);
      if (solvers[si] == "continuum" && slot.status.ok()) {
        continuum_amp = amp;
        continuum_ok = true;
      }
    }
    if (coarse) {
      Slot& slot = coarse_slots[mi];
      if (continuum_ok) {
        // the coarse grid reuses the converged-grid amplitude so the two
        // report the same protocol
        run_one(m, "continuum80", continuum_amp, slot);
      } else {
        slot.status.model_id = m.id;
        slot.status.solver = "continuum80";
        slot.status.error = "skipped: continuum calibration failed";
        report(slot.status);
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(n_models)));
  if (jobs <= 1) {
    for (std::size_t mi = 0; mi < n_models; ++mi) process_model(mi);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t mi = next.fetch_add(1); mi < n_models;
             mi = next.fetch_add(1)) {
          process_model(mi);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  MatrixResult res;
  std::vector<ComparisonRow> rows;
  for (const Slot& slot : slots) {
    res.statuses.push_back(slot.status);
    if (slot.status.ok()) rows.push_back(slot.status.row);
  }
  std::vector<ComparisonRow> coarse_rows;
  for (const Slot& slot : coarse_slots) {
    res.coarse_statuses.push_back(slot.status);
    if (slot.status.ok()) coarse_rows.push_back(slot.status.row);
  }

  write_comparison_csv((out / "comparison.csv").string(), rows);
  if (coarse) {
    write_comparison_csv((out / "comparison_coarse.csv").string(), coarse_rows);
  }
  write_tensors_csv(cfg, (out / "tensors.csv").string());
  atomic_write_file((out / "orderings.txt").string(), ordering_report(rows));

  if (opt.plots) {
    std::vector<const SimulationRecord*> recs;
    for (const Slot& slot : slots) {
      if (slot.has_rec) recs.push_back(&slot.rec);
    }
    write_matrix_plots(cfg, recs, out / "plots");
  }

  res.all_ok = true;
  for (const RunStatus& st : res.statuses) res.all_ok = res.all_ok && st.ok();
  for (const RunStatus& st : res.coarse_statuses) res.all_ok = res.all_ok && st.ok();
  return res;
}

void write_plots_from_dir(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path out(out_dir);
  std::vector<SimulationRecord> recs;
  for (const ModelConfig& m : cfg.models) {
    for (const std::string solver : {"discrete", "continuum"}) {
      const fs::path dir = out / m.id / solver;
      if (!fs::exists(dir / "traces.csv")) continue;
      SimulationRecord rec = read_traces_csv((dir / "traces.csv").string());
      for (double t : {15.0, 30.0}) {
        const fs::path snap = dir / snapshot_filename(t);
        if (fs::exists(snap)) rec.snapshots.push_back(read_snapshot_csv(snap.string()));
      }
      recs.push_back(std::move(rec));
    }
  }
  if (recs.empty()) {
    throw std::runtime_error("no run CSVs found under " + out_dir);
  }
  std::vector<const SimulationRecord*> ptrs;
  ptrs.reserve(recs.size());
  for (const SimulationRecord& r : recs) ptrs.push_back(&r);
  write_matrix_plots(cfg, ptrs, out / "plots");
}

}  // namespace strand
