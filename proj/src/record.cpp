#include "strand/record.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "strand/text_io.hpp"

namespace strand {

namespace {

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

void snapshot_profile(const Snapshot& s, std::vector<double>& x, std::vector<double>& v) {
  x.clear();
  v.clear();
  if (s.x.empty()) return;
  const double y0 = s.y[0];
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.y[i] == y0) {
      x.push_back(s.x[i]);
      v.push_back(s.v[i]);
    }
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::runtime_error("snapshot_profile: x not strictly increasing");
    }
  }
}

const Snapshot* snapshot_at(const SimulationRecord& rec, double t, double tol) {
  for (const Snapshot& s : rec.snapshots) {
    if (std::abs(s.t - t) <= tol) return &s;
  }
  return nullptr;
}

void write_traces_csv(const SimulationRecord& rec, const std::string& path) {
  std::string body;
  body += "# model=" + rec.meta.model_id + " solver=" + rec.meta.solver + "\n";
  body += "# dt_ms=" + format_double(rec.meta.dt) + " t_end_ms=" + format_double(rec.meta.t_end) + "\n";
  body += "# nodes_per_cell=" + std::to_string(rec.meta.nodes_per_cell) +
          " grid_nodes=" + std::to_string(rec.meta.grid_nodes) + "\n";
  body += "# stim_amplitude_uA_mm2=" + format_double(rec.meta.stim_amplitude) +
          " stim_on_ms=" + format_double(rec.meta.stim_on) +
          " stim_off_ms=" + format_double(rec.meta.stim_off) + "\n";
  body += "# max_conservation_residual=" + format_double(rec.meta.max_conservation_residual) + "\n";
  body += "t_ms";
  for (const ProbeTrace& p : rec.probes) body += ",v_mV@x=" + format_double(p.x);
  body += "\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    body += format_double(rec.times[i]);
    for (const ProbeTrace& p : rec.probes) body += "," + format_double(p.v[i]);
    body += "\n";
  }
  atomic_write_file(path, body);
}

void write_snapshot_csv(const Snapshot& snap, const std::string& path) {
  std::string body = "# t_ms=" + format_double(snap.t) + "\n";
  body += "x_mm,y_mm,phi_i_mV,phi_e_mV,v_mV\n";
  for (std::size_t i = 0; i < snap.x.size(); ++i) {
    body += format_double(snap.x[i]) + "," + format_double(snap.y[i]) + "," + format_double(snap.phi_i[i]) +
            "," + format_double(snap.phi_e[i]) + "," + format_double(snap.v[i]) + "\n";
  }
  atomic_write_file(path, body);
}

SimulationRecord read_traces_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SimulationRecord rec;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "model") rec.meta.model_id = val;
        else if (key == "solver") rec.meta.solver = val;
        else if (key == "dt_ms") rec.meta.dt = std::stod(val);
        else if (key == "t_end_ms") rec.meta.t_end = std::stod(val);
        else if (key == "nodes_per_cell") rec.meta.nodes_per_cell = std::stoi(val);
        else if (key == "grid_nodes") rec.meta.grid_nodes = std::stoi(val);
        else if (key == "stim_amplitude_uA_mm2") rec.meta.stim_amplitude = std::stod(val);
        else if (key == "stim_on_ms") rec.meta.stim_on = std::stod(val);
        else if (key == "stim_off_ms") rec.meta.stim_off = std::stod(val);
        else if (key == "max_conservation_residual") rec.meta.max_conservation_residual = std::stod(val);
      }
      continue;
    }
    if (!header_done) {
      std::stringstream ss(line);
      std::string col;
      bool first = true;
      while (std::getline(ss, col, ',')) {
        if (first) {
          first = false;
          continue;
        }
        const auto at = col.find("@x=");
        if (at == std::string::npos) throw std::runtime_error("bad trace header: " + col);
        ProbeTrace p;
        p.x = std::stod(col.substr(at + 3));
        rec.probes.push_back(p);
      }
      header_done = true;
      continue;
    }
    const std::vector<double> vals = split_doubles(line);
    if (vals.size() != rec.probes.size() + 1) {
      throw std::runtime_error("bad trace row in " + path);
    }
    rec.times.push_back(vals[0]);
    for (std::size_t c = 0; c < rec.probes.size(); ++c) {
      rec.probes[c].v.push_back(vals[c + 1]);
    }
  }
  return rec;
}

Snapshot read_snapshot_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Snapshot snap;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("t_ms=");
      if (eq != std::string::npos) snap.t = std::stod(line.substr(eq + 5));
      continue;
    }
    if (line[0] == 'x') continue;  // column header
    const std::vector<double> vals = split_doubles(line);
    if (vals.size() != 5) throw std::runtime_error("bad snapshot row in " + path);
    snap.x.push_back(vals[0]);
    snap.y.push_back(vals[1]);
    snap.phi_i.push_back(vals[2]);
    snap.phi_e.push_back(vals[3]);
    snap.v.push_back(vals[4]);
  }
  return snap;
}

}  // namespace strand
