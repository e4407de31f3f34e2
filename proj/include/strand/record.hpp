#pragma once

#include <string>
#include <vector>

namespace strand {

// Metadata for one simulation run, carried in the record and echoed as
// comment lines at the top of the trace CSV so a run is reproducible from
// its artefacts alone.
struct RunMeta {
  std::string model_id;
  std::string solver;  // "discrete", "continuum", or "continuum80"
  double dt = 0.0;
  double t_end = 0.0;
  int nodes_per_cell = 0;   // discrete runs
  int grid_nodes = 0;       // continuum runs
  double stim_amplitude = 0.0;  // uA/mm^2
  double stim_on = 0.0, stim_off = 0.0;
  double max_conservation_residual = 0.0;
  bool diverged = false;
};

struct ProbeTrace {
  double x = 0.0;          // station (mm)
  std::vector<double> v;   // one sample per recorded time (mV)
};

// Full spatial state at one instant. For the discrete solver each row is one
// membrane pair (ordered interface by interface, then by x); for the
// continuum solver each row is one grid node with y = 0.
struct Snapshot {
  double t = 0.0;
  std::vector<double> x, y, phi_i, phi_e, v;
};

struct SimulationRecord {
  RunMeta meta;
  std::vector<double> times;
  std::vector<ProbeTrace> probes;
  std::vector<Snapshot> snapshots;
};

// Single-valued v(x) profile of a snapshot: the rows sharing the y of the
// first row (the first membrane interface; every row for continuum data).
// x comes out strictly increasing.
void snapshot_profile(const Snapshot& s, std::vector<double>& x, std::vector<double>& v);

const Snapshot* snapshot_at(const SimulationRecord& rec, double t, double tol = 1e-6);

// CSV writers; files are written to a temporary name and renamed into place.
// Doubles are printed with %.17g so reruns are byte-identical.
void write_traces_csv(const SimulationRecord& rec, const std::string& path);
void write_snapshot_csv(const Snapshot& snap, const std::string& path);

// Readers for the plot subcommand; metadata comments are restored into rec.meta.
SimulationRecord read_traces_csv(const std::string& path);
Snapshot read_snapshot_csv(const std::string& path);

}  // namespace strand
