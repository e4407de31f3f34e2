#pragma once

#include <Eigen/Dense>
#include <vector>

#include "strand/geometry.hpp"

namespace strand {

// Homogenised description of one subunit: effective conductivity tensors for
// the two domains (mS/mm), membrane surface-to-volume ratios (1/mm), and the
// subunit areas (mm^2, the 2D stand-in for volume).
struct EffectiveTensors {
  Eigen::Matrix2d sigma_i = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sigma_e = Eigen::Matrix2d::Zero();
  double chi_i = 0.0, chi_g = 0.0;
  double v_cell = 0.0, v_intra = 0.0, v_extra = 0.0;
};

// Closed forms on the strip geometry. The intracellular longitudinal entry
// is the series (harmonic) combination of slab and cell body,
//   (h1/h) * sigma_i sigma_g L / (delta sigma_i + (L - delta) sigma_g),
// and both tensors have zero transverse entry.
Eigen::Matrix2d analytic_sigma_i(const SubunitGeometry& g, double sigma_i, double sigma_g);
Eigen::Matrix2d analytic_sigma_e(const SubunitGeometry& g, double sigma_e);
EffectiveTensors analytic_tensors(const SubunitGeometry& g, double sigma_i,
                                  double sigma_g, double sigma_e);

enum class CellDomain { intra, extra };

// Corrector fields W1, W2 on one subunit domain: periodic in x, zero mean,
// with the conductivity jump and the membrane condition absorbed into the
// weak form (for test function psi, int sigma grad W . grad psi =
// -int sigma d psi / d z_j). Solved with bilinear elements on a grid whose
// x lines include the slab edge, which makes the piecewise-linear solution
// exact up to solver precision.
struct CellProblemSolution {
  CellDomain domain = CellDomain::intra;
  int nx = 0, ny = 0;  // elements; nx periodic (nx distinct node columns)
  int n_gap = 0;       // leading x elements inside the slab
  std::vector<double> xs;  // nx node abscissae (last column identified with first)
  std::vector<double> ys;  // ny + 1 node ordinates
  Eigen::VectorXd w1, w2;  // nx * (ny + 1) values, column-major by row
  double sigma_first, sigma_rest;  // slab and body conductivity (equal for extra)
};

CellProblemSolution solve_cell_problem(const SubunitGeometry& g, double sigma_i,
                                       double sigma_g, double sigma_e,
                                       CellDomain domain, int nx = 256, int ny = 32);

// Effective tensor contribution (1/v_cell) int sigma (I + dW/dz) dV of one
// domain, by exact nodal quadrature of the bilinear gradients.
Eigen::Matrix2d tensor_from_corrector(const CellProblemSolution& sol,
                                      const SubunitGeometry& g);

// Both domains solved numerically and combined with the surface ratios.
EffectiveTensors numeric_tensors(const SubunitGeometry& g, double sigma_i,
                                 double sigma_g, double sigma_e, int nx = 256,
                                 int ny = 32);

}  // namespace strand
