#include "strand/pinned_solver.hpp"

#include <stdexcept>
#include <vector>

namespace strand {

void PinnedSolver::compute(const Eigen::SparseMatrix<double>& a, int pin) {
  pin_ = pin;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) + 1);
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      if (it.row() == pin || it.col() == pin) continue;
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  trips.emplace_back(pin, pin, 1.0);
  Eigen::SparseMatrix<double> pinned(a.rows(), a.cols());
  pinned.setFromTriplets(trips.begin(), trips.end());
  ldlt_.compute(pinned);
  if (ldlt_.info() != Eigen::Success) {
    throw std::runtime_error("PinnedSolver: factorisation failed (operator not SPD after pinning)");
  }
}

}  // namespace strand
