#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace strand {

// Direct factorisation of a symmetric positive semidefinite operator whose
// null space is the constant vector. One node is pinned to zero (row and
// column eliminated, unit diagonal), which is exact for consistent
// right-hand sides; callers re-reference the solution afterwards. The
// factorisation is computed once and reused for every solve, so repeated
// steps and repeated calibration probes pay only a triangular solve each.
class PinnedSolver {
 public:
  PinnedSolver() = default;

  void compute(const Eigen::SparseMatrix<double>& a, int pin);

  Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
    rhs[pin_] = 0.0;
    return ldlt_.solve(rhs);
  }

  int pin() const { return pin_; }
  bool ok() const { return ldlt_.info() == Eigen::Success; }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  int pin_ = 0;
};

}  // namespace strand
