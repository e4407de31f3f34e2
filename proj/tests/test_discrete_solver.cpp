#include <doctest.h>

#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "strand/beeler_reuter.hpp"
#include "strand/discrete_solver.hpp"
#include "strand/geometry.hpp"

using strand::BrState;
using strand::Conductivities;
using strand::DiscreteState;
using strand::DiscreteStepper;
using strand::DiscreteSystem;
using strand::MembraneModel;
using strand::ProbeSpec;
using strand::SimulationRecord;
using strand::StimulusSpec;
using strand::StrandMesh;
using strand::SubunitGeometry;

namespace {

SubunitGeometry mini_geometry() {
  SubunitGeometry g;
  g.n_cells = 30;
  g.n_fibres = 2;
  g.nodes_per_cell = 40;
  return g;
}

ProbeSpec mini_probes() {
  ProbeSpec pr;
  pr.stations = {0.5, 1.5, 2.5};
  pr.snapshot_times = {15.0};
  return pr;
}

StimulusSpec mini_stim(double amplitude) {
  StimulusSpec s;
  s.amplitude = amplitude;
  return s;
}

double mean_extra(const StrandMesh& m, const Eigen::VectorXd& phi) {
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < m.n_nodes(); ++i) {
    if (!m.node_is_intra[i]) {
      sum += phi[i];
      ++n;
    }
  }
  return sum / n;
}

// reference RK4 for the space-clamped comparison (sampled on the solver grid)
std::vector<double> rk4_reference(double amp, double t_on, double t_off,
                                  double t_end, double dt_fine, int every) {
  const BrState rest = strand::resting_state();
  std::array<double, 8> y = {rest.v, rest.m, rest.h, rest.j,
                             rest.d, rest.f, rest.x1, rest.ca};
  auto deriv = [&](const std::array<double, 8>& z, double t) {
    BrState s;
    s.v = z[0];
    s.m = z[1];
    s.h = z[2];
    s.j = z[3];
    s.d = z[4];
    s.f = z[5];
    s.x1 = z[6];
    s.ca = z[7];
    const double istim = (t >= t_on && t < t_off) ? amp : 0.0;
    return strand::state_derivative(s, istim, 0.01);
  };
  std::vector<double> out;
  const long n = std::lround(t_end / dt_fine);
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt_fine;
    const auto k1 = deriv(y, t);
    std::array<double, 8> ya, yb, yc;
    for (int q = 0; q < 8; ++q) ya[q] = y[q] + 0.5 * dt_fine * k1[q];
    const auto k2 = deriv(ya, t + 0.5 * dt_fine);
    for (int q = 0; q < 8; ++q) yb[q] = y[q] + 0.5 * dt_fine * k2[q];
    const auto k3 = deriv(yb, t + 0.5 * dt_fine);
    for (int q = 0; q < 8; ++q) yc[q] = y[q] + dt_fine * k3[q];
    const auto k4 = deriv(yc, t + dt_fine);
    for (int q = 0; q < 8; ++q)
      y[q] += dt_fine / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    if ((i + 1) % every == 0) out.push_back(y[0]);
  }
  return out;
}

}  // namespace

TEST_CASE("assembled stiffness is symmetric with constants in its null space") {
  const StrandMesh m = strand::build_mesh(mini_geometry());
  const DiscreteSystem sys(m, Conductivities{}, MembraneModel{});
  const Eigen::SparseMatrix<double>& A = sys.stiffness();

  REQUIRE(A.rows() == m.n_nodes());
  const Eigen::SparseMatrix<double> At = A.transpose();
  CHECK((A - At).norm() < 1e-14);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.rows());
  CHECK((A * ones).cwiseAbs().maxCoeff() < 1e-12);

  // intra and extra sets are decoupled, so a constant on one domain alone
  // is annihilated too
  Eigen::VectorXd indicator = Eigen::VectorXd::Zero(A.rows());
  for (int i = 0; i < m.n_nodes(); ++i)
    if (m.node_is_intra[i]) indicator[i] = 1.0;
  CHECK((A * indicator).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiffness assembly is linear in the conductivities") {
  const StrandMesh m = strand::build_mesh(mini_geometry());
  Conductivities c1;
  Conductivities c2{2 * c1.sigma_i, 2 * c1.sigma_g, 2 * c1.sigma_e};
  const DiscreteSystem s1(m, c1, MembraneModel{});
  const DiscreteSystem s2(m, c2, MembraneModel{});
  CHECK((s2.stiffness() - 2.0 * s1.stiffness()).norm() < 1e-12);
}

TEST_CASE("membrane entry tables follow the model switches") {
  const StrandMesh m = strand::build_mesh(mini_geometry());

  MembraneModel base;
  const DiscreteSystem sb(m, Conductivities{}, base);
  for (std::size_t k = 0; k < m.entries.size(); ++k) {
    const bool is_gap = m.entries[k].kind == strand::MembraneKind::gap;
    CHECK(sb.entry_capacitance()[k] == (is_gap ? base.c_g : base.c_m));
    CHECK(sb.entry_ionic_on()[k]);
  }

  MembraneModel insulating;
  insulating.c_g = 0.0;
  insulating.i_g = false;
  const DiscreteSystem si(m, Conductivities{}, insulating);
  for (std::size_t k = 0; k < m.entries.size(); ++k) {
    const bool is_gap = m.entries[k].kind == strand::MembraneKind::gap;
    CHECK(si.entry_capacitance()[k] == (is_gap ? 0.0 : insulating.c_m));
    CHECK(si.entry_ionic_on()[k] == !is_gap);
  }
}

TEST_CASE("unstimulated strand stays at rest") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  DiscreteState state = strand::initial_state(sys);
  const double v0 = state.pairs.front().v;
  CHECK(v0 == doctest::Approx(-84.573756122260875).epsilon(1e-9));

  DiscreteStepper stepper(sys, 0.01);
  StimulusSpec off;
  for (int i = 0; i < 200; ++i) stepper.step(state, off);
  for (const BrState& p : state.pairs) {
    CHECK(std::abs(p.v - v0) < 1e-6);
  }
}

TEST_CASE("stepping keeps the gauge and the pair potentials consistent") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  DiscreteState state = strand::initial_state(sys);
  DiscreteStepper stepper(sys, 0.01);
  StimulusSpec stim = mini_stim(1.5);
  stim.t_on = 0.5;
  stim.t_off = 1.5;

  for (int i = 0; i < 150; ++i) {
    stepper.step(state, stim);
    CHECK(std::abs(mean_extra(sys.mesh(), state.phi)) < 1e-12);
  }
  for (const strand::MembranePair& p : sys.mesh().pairs) {
    const int idx = static_cast<int>(&p - sys.mesh().pairs.data());
    CHECK(state.pairs[idx].v == state.phi[p.intra_node] - state.phi[p.extra_node]);
  }
}

TEST_CASE("suprathreshold stimulation propagates, subthreshold does not") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});

  DiscreteStepper stepper(sys, 0.01);
  CHECK(strand::propagates(sys, stepper, mini_stim(1.5), 25.0, 2.0));
  CHECK(!strand::propagates(sys, stepper, mini_stim(1e-3), 25.0, 2.0));
}

TEST_CASE("conservation residual stays small through an activation") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  const SimulationRecord rec =
      run_discrete(sys, mini_stim(1.5), 25.0, 0.01, mini_probes());
  CHECK(rec.meta.max_conservation_residual < 1e-8);
  CHECK(rec.meta.max_conservation_residual > 0.0);
}

TEST_CASE("a run is reproducible bit for bit") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  const SimulationRecord a =
      run_discrete(sys, mini_stim(1.5), 20.0, 0.01, mini_probes());
  const SimulationRecord b =
      run_discrete(sys, mini_stim(1.5), 20.0, 0.01, mini_probes());

  REQUIRE(a.times.size() == b.times.size());
  CHECK(a.times == b.times);
  REQUIRE(a.probes.size() == b.probes.size());
  for (std::size_t i = 0; i < a.probes.size(); ++i) {
    CHECK(a.probes[i].v == b.probes[i].v);
  }
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].v == b.snapshots[i].v);
    CHECK(a.snapshots[i].phi_e == b.snapshots[i].phi_e);
  }
}

TEST_CASE("snapshot rows expose v = phi_i - phi_e on a strictly increasing profile") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  const SimulationRecord rec =
      run_discrete(sys, mini_stim(1.5), 20.0, 0.01, mini_probes());
  REQUIRE(rec.snapshots.size() == 1);
  const strand::Snapshot& s = rec.snapshots.front();
  REQUIRE(!s.x.empty());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    CHECK(s.v[i] == doctest::Approx(s.phi_i[i] - s.phi_e[i]).epsilon(1e-12));
  }
  std::vector<double> px, pv;
  strand::snapshot_profile(s, px, pv);
  REQUIRE(px.size() > 2);
  for (std::size_t i = 1; i < px.size(); ++i) CHECK(px[i] > px[i - 1]);
}

TEST_CASE("divergence is reported, not silently propagated") {
  const DiscreteSystem sys(strand::build_mesh(mini_geometry()), Conductivities{},
                           MembraneModel{});
  DiscreteState state = strand::initial_state(sys);
  DiscreteStepper stepper(sys, 0.01);
  StimulusSpec bomb = mini_stim(1e7);
  bomb.t_on = 0.0;
  bomb.t_off = 1.0;
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) stepper.step(state, bomb);
      }(),
      std::runtime_error);
}

TEST_CASE("well-coupled uniform patch reproduces the space-clamped membrane") {
  // one subunit, huge conductivities, stimulus on every membrane entry:
  // each patch then sees the dynamics of the isolated membrane
  SubunitGeometry g;
  g.n_cells = 1;
  g.n_fibres = 1;
  g.nodes_per_cell = 24;
  Conductivities c;
  c.sigma_i = c.sigma_g = c.sigma_e = 1e4;

  const DiscreteSystem sys(strand::build_mesh(g), c, MembraneModel{});
  StimulusSpec stim = mini_stim(0.08);
  stim.x_max = 2.0 * g.L;  // past the last pair, so every entry is driven
  stim.include_gap_membrane = true;

  ProbeSpec probes;
  probes.stations = {g.L / 2};
  probes.snapshot_times = {};

  const double dt = 0.005;
  const SimulationRecord rec = run_discrete(sys, stim, 20.0, dt, probes);
  const std::vector<double> ref = rk4_reference(0.08, 5.0, 10.0, 20.0, 1e-4, 50);

  REQUIRE(rec.probes.size() == 1);
  REQUIRE(rec.probes[0].v.size() == ref.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    max_err = std::max(max_err, std::abs(rec.probes[0].v[i] - ref[i]));
  }
  // the residual gap is the splitting error of the semi-implicit scheme
  CHECK(max_err < 0.5);
}
