#include "strand/continuum_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace strand {

double ContinuumSystem::capacitance_density() const {
  return membrane.c_m * tensors.chi_i + membrane.c_g * tensors.chi_g;
}

double ContinuumSystem::ionic_density() const {
  return tensors.chi_i + (membrane.i_g ? tensors.chi_g : 0.0);
}

ContinuumSystem make_continuum_system(const SubunitGeometry& geom,
                                      const EffectiveTensors& tensors,
                                      const MembraneModel& membrane,
                                      int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("continuum grid needs at least 2 nodes");
  ContinuumSystem sys;
  const double len = geom.n_cells * geom.L;
  sys.x.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) sys.x[i] = len * i / (n_nodes - 1);
  sys.tensors = tensors;
  sys.membrane = membrane;
  return sys;
}

ContinuumState initial_state(const ContinuumSystem& sys) {
  const BrState rest = resting_state();
  ContinuumState s;
  s.v = Eigen::VectorXd::Constant(sys.n_nodes(), rest.v);
  s.phi_e = Eigen::VectorXd::Zero(sys.n_nodes());
  s.nodes.assign(sys.x.size(), rest);
  s.t = 0.0;
  return s;
}

ContinuumStepper::ContinuumStepper(const ContinuumSystem& sys, double dt)
    : sys_(sys), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ContinuumStepper: dt must be positive");
  const int n = sys.n_nodes();
  const double si = sys.tensors.sigma_i(0, 0);
  const double se = sys.tensors.sigma_e(0, 0);
  const double c_eff = sys.capacitance_density();

  // block unknown vector (V, phi_e); both equations share the 1D P1
  // stiffness, the parabolic one adds a lumped capacitance on the V block
  lumped_mass_ = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 12);
  for (int e = 0; e + 1 < n; ++e) {
    const double dx = sys.x[e + 1] - sys.x[e];
    const double k = 1.0 / dx;
    lumped_mass_[e] += dx / 2;
    lumped_mass_[e + 1] += dx / 2;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double kk = (a == b ? k : -k);
        const int ra = e + a, cb = e + b;
        trips.emplace_back(ra, cb, si * kk);              // (V,V)
        trips.emplace_back(ra, n + cb, si * kk);          // (V,phi)
        trips.emplace_back(n + ra, cb, si * kk);          // (phi,V)
        trips.emplace_back(n + ra, n + cb, (si + se) * kk);  // (phi,phi)
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, c_eff * lumped_mass_[i] / dt);
  }
  Eigen::SparseMatrix<double> op(2 * n, 2 * n);
  op.setFromTriplets(trips.begin(), trips.end());
  solver_.compute(op, n);  // pin the first phi_e degree of freedom
  rhs_.resize(2 * n);
}

void ContinuumStepper::step(ContinuumState& state, const StimulusSpec& stim) {
  const int n = sys_.n_nodes();
  const double c_eff = sys_.capacitance_density();
  const double chi_ion = sys_.ionic_density();
  const double chi_stim =
      sys_.tensors.chi_i + (stim.include_gap_membrane ? sys_.tensors.chi_g : 0.0);
  const bool stim_on = state.t >= stim.t_on && state.t < stim.t_off &&
                       stim.amplitude != 0.0;

  rhs_.setZero();
  for (int i = 0; i < n; ++i) {
    const double iion = ionic_current(state.nodes[i]);
    const double istim = (stim_on && sys_.x[i] < stim.x_max) ? stim.amplitude : 0.0;
    rhs_[i] = lumped_mass_[i] *
              (c_eff / dt_ * state.v[i] - chi_ion * iion + chi_stim * istim);
  }

  const Eigen::VectorXd sol = solver_.solve(rhs_);
  Eigen::VectorXd v_new = sol.head(n);
  Eigen::VectorXd phi = sol.tail(n);
  phi.array() -= phi.mean();

  double net = 0.0, gross = 0.0;
  for (int i = 0; i < n; ++i) {
    const double iion = ionic_current(state.nodes[i]);
    const double istim = (stim_on && sys_.x[i] < stim.x_max) ? stim.amplitude : 0.0;
    const double i_m = c_eff * (v_new[i] - state.v[i]) / dt_ + chi_ion * iion -
                       chi_stim * istim;
    net += lumped_mass_[i] * i_m;
    gross += lumped_mass_[i] * std::abs(i_m);
  }
  // denominator floor at a mean density of 1e-3 uA/mm^2 of membrane, as in
  // the discrete stepper
  const double chi_total = sys_.tensors.chi_i + sys_.tensors.chi_g;
  last_residual_ =
      std::abs(net) / std::max(gross, 1e-3 * chi_total * sys_.length());

  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(v_new[i]) || std::abs(v_new[i]) > 200.0) {
      throw std::runtime_error("continuum solver diverged: |v| > 200 mV at x = " +
                               std::to_string(sys_.x[i]) + " mm, t = " +
                               std::to_string(state.t + dt_) + " ms");
    }
    state.nodes[i] = step_gates(state.nodes[i], v_new[i], dt_);
  }
  state.v = std::move(v_new);
  state.phi_e = std::move(phi);
  state.t += dt_;
}

namespace {

std::vector<int> pick_probe_nodes(const std::vector<double>& x,
                                  const std::vector<double>& stations) {
  std::vector<int> out;
  out.reserve(stations.size());
  for (double sx : stations) {
    int best = 0;
    double bd = std::abs(x[0] - sx);
    for (int j = 1; j < static_cast<int>(x.size()); ++j) {
      const double d = std::abs(x[j] - sx);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    out.push_back(best);
  }
  return out;
}

Snapshot take_snapshot(const ContinuumSystem& sys, const ContinuumState& s) {
  Snapshot snap;
  snap.t = s.t;
  const int n = sys.n_nodes();
  snap.x.reserve(n);
  snap.y.reserve(n);
  snap.phi_i.reserve(n);
  snap.phi_e.reserve(n);
  snap.v.reserve(n);
  for (int i = 0; i < n; ++i) {
    snap.x.push_back(sys.x[i]);
    snap.y.push_back(0.0);
    snap.phi_i.push_back(s.v[i] + s.phi_e[i]);
    snap.phi_e.push_back(s.phi_e[i]);
    snap.v.push_back(s.v[i]);
  }
  return snap;
}

}  // namespace

SimulationRecord run_continuum(const ContinuumSystem& sys, const StimulusSpec& stim,
                               double t_end, double dt, const ProbeSpec& probes) {
  ContinuumStepper stepper(sys, dt);
  ContinuumState state = initial_state(sys);

  SimulationRecord rec;
  rec.meta.solver = "continuum";
  rec.meta.dt = dt;
  rec.meta.t_end = t_end;
  rec.meta.grid_nodes = sys.n_nodes();
  rec.meta.stim_amplitude = stim.amplitude;
  rec.meta.stim_on = stim.t_on;
  rec.meta.stim_off = stim.t_off;

  const std::vector<int> probe_nodes = pick_probe_nodes(sys.x, probes.stations);
  rec.probes.resize(probe_nodes.size());
  for (std::size_t i = 0; i < probe_nodes.size(); ++i) {
    rec.probes[i].x = sys.x[probe_nodes[i]];
  }

  const long n_steps = std::lround(t_end / dt);
  rec.times.reserve(n_steps);
  double max_res = 0.0;
  std::vector<bool> snapped(probes.snapshot_times.size(), false);
  for (long it = 0; it < n_steps; ++it) {
    stepper.step(state, stim);
    max_res = std::max(max_res, stepper.last_conservation_residual());
    rec.times.push_back(state.t);
    for (std::size_t i = 0; i < probe_nodes.size(); ++i) {
      rec.probes[i].v.push_back(state.v[probe_nodes[i]]);
    }
    for (std::size_t si = 0; si < probes.snapshot_times.size(); ++si) {
      if (!snapped[si] && std::abs(state.t - probes.snapshot_times[si]) < dt / 2) {
        rec.snapshots.push_back(take_snapshot(sys, state));
        rec.snapshots.back().t = probes.snapshot_times[si];
        snapped[si] = true;
      }
    }
  }
  rec.meta.max_conservation_residual = max_res;
  return rec;
}

bool propagates(const ContinuumSystem& sys, ContinuumStepper& stepper,
                const StimulusSpec& stim, double t_end, double x_watch,
                double threshold) {
  ContinuumState state = initial_state(sys);
  int watch = sys.n_nodes() - 1;
  for (int j = 0; j < sys.n_nodes(); ++j) {
    if (sys.x[j] >= x_watch) {
      watch = j;
      break;
    }
  }
  const long n_steps = std::lround(t_end / stepper.dt());
  for (long it = 0; it < n_steps; ++it) {
    stepper.step(state, stim);
    if (state.v[watch] >= threshold) return true;
  }
  return false;
}

}  // namespace strand
