#pragma once

#include <array>

namespace strand {

// State of one membrane patch: transmembrane potential, the six gating
// variables of the Beeler-Reuter (1977) ventricular model, and intracellular
// calcium. Units: v in mV, ca in mol/L, gates dimensionless in [0,1].
struct BrState {
  double v = 0.0;
  double m = 0.0, h = 0.0, j = 0.0;
  double d = 0.0, f = 0.0, x1 = 0.0;
  double ca = 0.0;
};

// Conductance table. Zeroing every entry makes the total ionic current
// vanish identically. current_scale converts the reference uA/cm^2 values
// to this project's uA/mm^2 unit system.
struct IonicCurrentParams {
  double g_na = 4.0;     // fast inward sodium, gated
  double g_nac = 0.003;  // sodium background leak
  double g_s = 0.09;     // slow inward (calcium)
  double g_k1 = 0.35;    // time-independent outward potassium
  double g_x1 = 0.8;     // activated outward current
  double current_scale = 0.01;
};

// Rate constants alpha/beta for the six gates at potential v (1/ms).
struct GateRates {
  double a_m, b_m, a_h, b_h, a_j, b_j;
  double a_d, b_d, a_f, b_f, a_x1, b_x1;
};

GateRates gate_rates(double v);

// Total ionic current density in uA/mm^2. Sign convention: positive values
// repolarise, i.e. the space-clamped membrane obeys c dv/dt = -I_ion + I_stim.
double ionic_current(const BrState& s, const IonicCurrentParams& p = {});

// Advance the gates over dt at fixed potential v: gates by the exponential
// (Rush-Larsen) rule, which keeps them in [0,1] for any dt > 0; calcium by
// forward Euler. The returned state carries v. Throws on non-finite v.
BrState step_gates(const BrState& s, double v, double dt,
                   const IonicCurrentParams& p = {});

// Equilibrium state: root of the total ionic current with every gate at its
// steady-state value and calcium self-consistent. Throws if the root finder
// fails to bracket or converge.
BrState resting_state(const IonicCurrentParams& p = {});

// Time derivative of the full space-clamped state [v, m, h, j, d, f, x1, ca]
// under c dv/dt = -I_ion + i_stim. Used by reference integrators.
std::array<double, 8> state_derivative(const BrState& s, double i_stim,
                                       double c_m,
                                       const IonicCurrentParams& p = {});

}  // namespace strand
