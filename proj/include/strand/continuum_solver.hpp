#pragma once

#include <vector>

#include <Eigen/Dense>

#include "strand/beeler_reuter.hpp"
#include "strand/discrete_solver.hpp"
#include "strand/geometry.hpp"
#include "strand/homogenisation.hpp"
#include "strand/pinned_solver.hpp"
#include "strand/record.hpp"

namespace strand {

// Homogenised strand on [0, n_cells * L]. The effective tensors have a zero
// (2,2) entry on this geometry, so nothing propagates transversally and the
// model reduces exactly to 1D along x. Unknowns are the transmembrane
// potential V and the extracellular potential phi_e on a shared uniform grid.
struct ContinuumSystem {
  std::vector<double> x;  // node positions (mm), uniform spacing
  EffectiveTensors tensors;
  MembraneModel membrane;

  int n_nodes() const { return static_cast<int>(x.size()); }
  double length() const { return x.back(); }
  // volume-weighted capacitance (uF/mm^3) and ionic surface density (1/mm)
  double capacitance_density() const;
  double ionic_density() const;
};

ContinuumSystem make_continuum_system(const SubunitGeometry& geom,
                                      const EffectiveTensors& tensors,
                                      const MembraneModel& membrane,
                                      int n_nodes);

struct ContinuumState {
  Eigen::VectorXd v;      // transmembrane potential (mV)
  Eigen::VectorXd phi_e;  // extracellular potential (mV), zero mean
  std::vector<BrState> nodes;
  double t = 0.0;
};

ContinuumState initial_state(const ContinuumSystem& sys);

// Semi-implicit stepper mirroring the discrete one: diffusion and capacitive
// coupling implicit in one symmetric block solve for (V, phi_e), ionic
// currents explicit, gates advanced at the new potential. The factorisation
// is reused across steps.
class ContinuumStepper {
 public:
  ContinuumStepper(const ContinuumSystem& sys, double dt);

  void step(ContinuumState& state, const StimulusSpec& stim);

  double dt() const { return dt_; }
  // |net transmembrane current| / gross, over the whole strand, last step
  double last_conservation_residual() const { return last_residual_; }

 private:
  const ContinuumSystem& sys_;
  double dt_ = 0.0;
  PinnedSolver solver_;
  Eigen::VectorXd lumped_mass_;  // per node (mm)
  Eigen::VectorXd rhs_;
  double last_residual_ = 0.0;
};

// Advances the system from rest and records probe traces and snapshots in
// the same format as the discrete solver (snapshots carry y = 0 and
// phi_i = V + phi_e).
SimulationRecord run_continuum(const ContinuumSystem& sys, const StimulusSpec& stim,
                               double t_end, double dt, const ProbeSpec& probes);

// True if v crosses threshold at the first node with x >= x_watch.
bool propagates(const ContinuumSystem& sys, ContinuumStepper& stepper,
                const StimulusSpec& stim, double t_end, double x_watch,
                double threshold = -20.0);

}  // namespace strand
