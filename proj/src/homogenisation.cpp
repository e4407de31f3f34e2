#include "strand/homogenisation.hpp"

#include <cmath>
#include <stdexcept>

#include "strand/pinned_solver.hpp"

namespace strand {

Eigen::Matrix2d analytic_sigma_i(const SubunitGeometry& g, double sigma_i, double sigma_g) {
  if (!(sigma_i > 0.0) || !(sigma_g > 0.0)) {
    throw std::invalid_argument("analytic_sigma_i: conductivities must be positive");
  }
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  const double frac = g.h1 / g.h;
  s(0, 0) = frac * sigma_i * sigma_g * g.L /
            (g.delta * sigma_i + (g.L - g.delta) * sigma_g);
  return s;
}

Eigen::Matrix2d analytic_sigma_e(const SubunitGeometry& g, double sigma_e) {
  if (!(sigma_e > 0.0)) {
    throw std::invalid_argument("analytic_sigma_e: conductivity must be positive");
  }
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  s(0, 0) = (1.0 - g.h1 / g.h) * sigma_e;
  return s;
}

EffectiveTensors analytic_tensors(const SubunitGeometry& g, double sigma_i,
                                  double sigma_g, double sigma_e) {
  EffectiveTensors t;
  t.sigma_i = analytic_sigma_i(g, sigma_i, sigma_g);
  t.sigma_e = analytic_sigma_e(g, sigma_e);
  const auto [chi_i, chi_g] = surface_ratios(g);
  t.chi_i = chi_i;
  t.chi_g = chi_g;
  t.v_cell = g.L * g.h;
  t.v_intra = g.L * g.h1;
  t.v_extra = g.L * (g.h - g.h1);
  return t;
}

namespace {

struct CellGrid {
  int nx, ny, n_gap;
  std::vector<double> xs;  // nx values, element e spans [xs[e], xs[e+1]], xs[nx] = L
  double dy;
  double height;
  double x_right(int e) const { return e + 1 == nx ? xs[0] + period : xs[e + 1]; }
  double period;
};

CellGrid make_grid(const SubunitGeometry& g, CellDomain domain, int nx, int ny) {
  if (nx < 8 || ny < 1) throw std::invalid_argument("solve_cell_problem: grid too small");
  CellGrid cg;
  cg.nx = nx;
  cg.ny = ny;
  cg.period = g.L;
  cg.height = domain == CellDomain::intra ? g.h1 : g.h - g.h1;
  cg.dy = cg.height / ny;
  cg.n_gap = std::max(2, static_cast<int>(std::lround(nx * g.delta / g.L)));
  if (nx - cg.n_gap < 2) throw std::invalid_argument("solve_cell_problem: slab leaves no body elements");
  cg.xs.resize(nx);
  for (int e = 0; e < cg.n_gap; ++e) cg.xs[e] = g.delta * e / cg.n_gap;
  const int n_body = nx - cg.n_gap;
  for (int e = 0; e <= n_body; ++e) {
    if (cg.n_gap + e < nx) cg.xs[cg.n_gap + e] = g.delta + (g.L - g.delta) * e / n_body;
  }
  return cg;
}

}  // namespace

CellProblemSolution solve_cell_problem(const SubunitGeometry& g, double sigma_i,
                                       double sigma_g, double sigma_e,
                                       CellDomain domain, int nx, int ny) {
  const CellGrid cg = make_grid(g, domain, nx, ny);
  const double sig_first = domain == CellDomain::intra ? sigma_g : sigma_e;
  const double sig_rest = domain == CellDomain::intra ? sigma_i : sigma_e;

  const int n = nx * (ny + 1);
  auto node = [nx](int row, int col) { return row * nx + (col % nx); };

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nx) * ny * 16);
  Eigen::VectorXd rhs1 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd rhs2 = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < ny; ++r) {
    for (int e = 0; e < nx; ++e) {
      const double a = (e + 1 < nx ? cg.xs[e + 1] : g.L) - cg.xs[e];
      const double b = cg.dy;
      const double sig = e < cg.n_gap ? sig_first : sig_rest;
      const int nn[4] = {node(r, e), node(r, e + 1), node(r + 1, e), node(r + 1, e + 1)};
      const double kx = sig * b / (6.0 * a);
      const double ky = sig * a / (6.0 * b);
      static const int cx[4][4] = {{2, -2, 1, -1}, {-2, 2, -1, 1}, {1, -1, 2, -2}, {-1, 1, -2, 2}};
      static const int cy[4][4] = {{2, 1, -2, -1}, {1, 2, -1, -2}, {-2, -1, 2, 1}, {-1, -2, 1, 2}};
      for (int i = 0; i < 4; ++i) {
        for (int jj = 0; jj < 4; ++jj) {
          trips.emplace_back(nn[i], nn[jj], kx * cx[i][jj] + ky * cy[i][jj]);
        }
      }
      // -int sigma dpsi/dz_j over the element, exact for bilinear psi
      const double gx[4] = {-b / 2, b / 2, -b / 2, b / 2};
      const double gy[4] = {-a / 2, -a / 2, a / 2, a / 2};
      for (int i = 0; i < 4; ++i) {
        rhs1[nn[i]] -= sig * gx[i];
        rhs2[nn[i]] -= sig * gy[i];
      }
    }
  }
  Eigen::SparseMatrix<double> stiff(n, n);
  stiff.setFromTriplets(trips.begin(), trips.end());

  PinnedSolver solver;
  solver.compute(stiff, 0);
  Eigen::VectorXd w1 = solver.solve(rhs1);
  Eigen::VectorXd w2 = solver.solve(rhs2);

  // lumped-mass weighted zero mean over the domain
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < ny; ++r) {
    for (int e = 0; e < nx; ++e) {
      const double a = (e + 1 < nx ? cg.xs[e + 1] : g.L) - cg.xs[e];
      const double q = a * cg.dy / 4.0;
      const int nn[4] = {node(r, e), node(r, e + 1), node(r + 1, e), node(r + 1, e + 1)};
      for (int i = 0; i < 4; ++i) mass[nn[i]] += q;
    }
  }
  const double area = mass.sum();
  w1.array() -= mass.dot(w1) / area;
  w2.array() -= mass.dot(w2) / area;

  CellProblemSolution sol;
  sol.domain = domain;
  sol.nx = nx;
  sol.ny = ny;
  sol.n_gap = cg.n_gap;
  sol.xs = cg.xs;
  sol.ys.resize(ny + 1);
  for (int r = 0; r <= ny; ++r) sol.ys[r] = r * cg.dy;
  sol.w1 = std::move(w1);
  sol.w2 = std::move(w2);
  sol.sigma_first = sig_first;
  sol.sigma_rest = sig_rest;
  return sol;
}

Eigen::Matrix2d tensor_from_corrector(const CellProblemSolution& sol,
                                      const SubunitGeometry& g) {
  const int nx = sol.nx, ny = sol.ny;
  auto node = [nx](int row, int col) { return row * nx + (col % nx); };
  const double v_cell = g.L * g.h;
  Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
  const double dy = sol.ys[1] - sol.ys[0];
  for (int r = 0; r < ny; ++r) {
    for (int e = 0; e < nx; ++e) {
      const double a = (e + 1 < nx ? sol.xs[e + 1] : g.L) - sol.xs[e];
      const double sig = e < sol.n_gap ? sol.sigma_first : sol.sigma_rest;
      const int nn[4] = {node(r, e), node(r, e + 1), node(r + 1, e), node(r + 1, e + 1)};
      for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd& w = j == 0 ? sol.w1 : sol.w2;
        const double ix = dy / 2.0 * (w[nn[1]] - w[nn[0]] + w[nn[3]] - w[nn[2]]);
        const double iy = a / 2.0 * (w[nn[2]] - w[nn[0]] + w[nn[3]] - w[nn[1]]);
        t(j, 0) += sig * ((j == 0 ? a * dy : 0.0) + ix);
        t(j, 1) += sig * ((j == 1 ? a * dy : 0.0) + iy);
      }
    }
  }
  return t / v_cell;
}

EffectiveTensors numeric_tensors(const SubunitGeometry& g, double sigma_i,
                                 double sigma_g, double sigma_e, int nx, int ny) {
  EffectiveTensors t = analytic_tensors(g, sigma_i, sigma_g, sigma_e);
  const CellProblemSolution wi =
      solve_cell_problem(g, sigma_i, sigma_g, sigma_e, CellDomain::intra, nx, ny);
  const CellProblemSolution we =
      solve_cell_problem(g, sigma_i, sigma_g, sigma_e, CellDomain::extra, nx, ny);
  t.sigma_i = tensor_from_corrector(wi, g);
  t.sigma_e = tensor_from_corrector(we, g);
  return t;
}

}  // namespace strand
