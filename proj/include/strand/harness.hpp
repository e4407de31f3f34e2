#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "strand/analysis.hpp"
#include "strand/config.hpp"
#include "strand/record.hpp"

namespace strand {

// Deterministic stimulus calibration for one model and solver ("discrete"
// or "continuum"): the amplitude bracket [1, 2048] is scanned in powers of
// two, refined by 12 bisections on "activation reaches x = 2 mm", and the
// threshold is returned with a 1.5x safety factor. Throws if even the
// largest bracket amplitude fails to propagate.
double calibrate_stimulus(const RunConfig& cfg, const ModelConfig& model,
                          const std::string& solver);

// One simulation at a fixed stimulus amplitude. solver is "discrete",
// "continuum" (converged grid) or "continuum80" (coarse reporting grid).
SimulationRecord execute_run(const RunConfig& cfg, const ModelConfig& model,
                             const std::string& solver, double amplitude);

// Effective-tensor report for every configured model: analytic closed form
// next to the numeric cell-problem value.
void write_tensors_csv(const RunConfig& cfg, const std::string& path);

struct MatrixOptions {
  std::string out_dir = "out";
  bool run_discrete = true;
  bool run_continuum = true;
  bool coarse_grid = true;  // additionally run the continuum coarse grid
  bool plots = true;
  int jobs = 1;             // models processed concurrently
};

struct RunStatus {
  std::string model_id;
  std::string solver;
  double amplitude = 0.0;
  ComparisonRow row;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct MatrixResult {
  std::vector<RunStatus> statuses;         // converged-grid runs, config order
  std::vector<RunStatus> coarse_statuses;  // coarse-grid runs
  bool all_ok = false;
};

// Runs the full experiment matrix and writes the artifact tree:
//   <out>/<model>/<solver>/{traces.csv, snapshot_15ms.csv, snapshot_30ms.csv}
//   <out>/comparison.csv            (converged-grid rows)
//   <out>/comparison_coarse.csv     (coarse continuum rows, when enabled)
//   <out>/tensors.csv  <out>/orderings.txt  <out>/plots/*.svg
// A failed run is reported in its status; the remaining runs still execute.
// Progress lines go to *progress when given.
MatrixResult run_matrix(const RunConfig& cfg, const MatrixOptions& opt,
                        std::ostream* progress = nullptr);

// Rebuilds every SVG under out_dir/plots from the CSVs already present.
void write_plots_from_dir(const RunConfig& cfg, const std::string& out_dir);

}  // namespace strand
