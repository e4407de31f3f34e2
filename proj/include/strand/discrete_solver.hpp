#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "strand/beeler_reuter.hpp"
#include "strand/geometry.hpp"
#include "strand/pinned_solver.hpp"
#include "strand/record.hpp"

namespace strand {

struct Conductivities {
  double sigma_i = 0.175;  // mS/mm
  double sigma_g = 0.175;
  double sigma_e = 0.7;
};

// Membrane electrical parameters. The gap-junction membrane has its own
// capacitance and an ionic-flow switch; with c_g = 0 and i_g = false it
// carries no transmembrane current at all.
struct MembraneModel {
  double c_m = 0.01;  // uF/mm^2
  double c_g = 0.01;
  bool i_g = true;
};

// Transmembrane current stimulus: uniform density added to membrane pairs
// with x < x_max inside [t_on, t_off). By default only cell-kind surface is
// driven, so a fully insulating gap membrane stays currentless; tests may
// widen it to every pair.
struct StimulusSpec {
  double amplitude = 0.0;  // uA/mm^2
  double t_on = 5.0, t_off = 10.0;
  double x_max = 0.1;
  bool include_gap_membrane = false;
};

struct ProbeSpec {
  std::vector<double> stations = {2.5, 3.0, 5.0, 7.0, 7.5};  // mm
  std::vector<double> snapshot_times = {15.0, 30.0};          // ms
};

// Mesh plus assembled operators: the block-diagonal stiffness over the
// disjoint intra/extra node sets, and per-entry membrane capacitances.
// The stiffness is symmetric positive semidefinite with the constants of
// each connected component as null space.
class DiscreteSystem {
 public:
  DiscreteSystem(StrandMesh mesh, const Conductivities& cond, const MembraneModel& mem);

  const StrandMesh& mesh() const { return mesh_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const MembraneModel& membrane() const { return membrane_; }
  const Conductivities& conductivities() const { return cond_; }
  // capacitance per membrane entry (c_m or c_g by kind)
  const std::vector<double>& entry_capacitance() const { return entry_c_; }
  // true where the ionic current acts (cell kind, or gap kind with i_g)
  const std::vector<bool>& entry_ionic_on() const { return entry_ionic_; }

 private:
  StrandMesh mesh_;
  Conductivities cond_;
  MembraneModel membrane_;
  Eigen::SparseMatrix<double> stiffness_;
  std::vector<double> entry_c_;
  std::vector<bool> entry_ionic_;
};

struct DiscreteState {
  Eigen::VectorXd phi;          // all nodes; gauge fixed to mean(phi_e) = 0
  std::vector<BrState> pairs;   // membrane state per pair
  double t = 0.0;
};

DiscreteState initial_state(const DiscreteSystem& sys);

// Semi-implicit stepper: conductance and capacitive coupling implicit, ionic
// current explicit. The step operator depends only on the mesh, membrane and
// dt, so it is factorised once here and reused for every step (and for every
// calibration probe at the same dt).
class DiscreteStepper {
 public:
  DiscreteStepper(const DiscreteSystem& sys, double dt);

  // Advances state by dt. Throws on divergence (|v| > 200 mV) or a failed solve.
  void step(DiscreteState& state, const StimulusSpec& stim);

  double dt() const { return dt_; }
  // |sum w I_m| / max(sum w |I_m|, floor) for the latest step
  double last_conservation_residual() const { return last_residual_; }

 private:
  const DiscreteSystem& sys_;
  double dt_;
  PinnedSolver solver_;
  double total_weight_ = 0.0;  // membrane surface per unit depth
  double last_residual_ = 0.0;
  Eigen::VectorXd rhs_;
  std::vector<double> pair_iion_;
};

// Full run with probes and snapshots; time samples are recorded every step.
SimulationRecord run_discrete(const DiscreteSystem& sys, const StimulusSpec& stim,
                              double t_end, double dt, const ProbeSpec& probes);

// Calibration helper: advance until any probe pair at x >= x_watch crosses
// threshold (true) or t_end is reached (false). Reuses a prebuilt stepper.
bool propagates(const DiscreteSystem& sys, DiscreteStepper& stepper,
                const StimulusSpec& stim, double t_end, double x_watch,
                double threshold = -20.0);

}  // namespace strand
