#pragma once

#include <string>
#include <vector>

#include "strand/geometry.hpp"
#include "strand/record.hpp"

namespace strand {

// Wave speed between two probe stations, from linearly interpolated upward
// threshold crossings.
struct CvEstimate {
  double cv = 0.0;         // mm/ms
  double x_a = 0.0, x_b = 0.0;  // stations actually used (mm)
  double t_a = 0.0, t_b = 0.0;  // activation times (ms)
  double threshold = 0.0;  // mV
  bool propagating = false;
};

// Uses the recorded probe traces nearest to the requested stations. Stations
// should sit mid-domain, away from the stimulus and the far boundary.
CvEstimate conduction_velocity(const SimulationRecord& rec, double threshold = -20.0,
                               double x_a = 2.5, double x_b = 7.5);

// Largest x whose potential exceeds the threshold; NaN if the whole profile
// is below it.
double wavefront_position(const Snapshot& snap, double threshold = -20.0);

// Maximum |dv/dx| split by membrane kind at the interval midpoint: the gap
// slab occupies [k*L, k*L + delta) of each subunit.
struct SteepnessSplit {
  double gap = 0.0;   // mV/mm
  double cell = 0.0;  // mV/mm
  double ratio() const;
};

SteepnessSplit steepness_split(const std::vector<double>& x,
                               const std::vector<double>& v,
                               const SubunitGeometry& geom);

// Single-class maximum |dv/dx| for profiles without subunit structure.
double max_steepness(const std::vector<double>& x, const std::vector<double>& v);

// Fraction of spatial signal power at the given wavelength: the profile is
// resampled to a uniform grid and a single Fourier bin is compared against
// the total variance. Returns a value in [0, 1].
double periodic_power_fraction(const std::vector<double>& x,
                               const std::vector<double>& v, double wavelength);

// One row of the cross-model comparison table.
struct ComparisonRow {
  std::string model_id;
  std::string solver;
  double stim_amplitude = 0.0;       // uA/mm^2
  double cv = 0.0;                   // mm/ms
  bool propagating = false;
  double wavefront_30ms = 0.0;       // mm
  double steepness_gap = 0.0;        // mV/mm
  double steepness_cell = 0.0;       // mV/mm
  double steepness_ratio = 1.0;
  double periodic_power_15ms = 0.0;  // power fraction at wavelength L
  double periodic_power_30ms = 0.0;
  double max_conservation_residual = 0.0;
};

// Derives the comparison quantities from one record. Discrete records are
// reduced to their first-interface profile and split by membrane kind;
// continuum records report a single steepness class (ratio fixed at 1).
ComparisonRow analyse_record(const SimulationRecord& rec, const SubunitGeometry& geom);

std::vector<ComparisonRow> compare_models(const std::vector<SimulationRecord>& recs,
                                          const SubunitGeometry& geom);

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> read_comparison_csv(const std::string& path);

// Plain-text summary of the pairwise effect orderings across models, one
// conclusion per line, computed per solver from the comparison rows.
std::string ordering_report(const std::vector<ComparisonRow>& rows);

}  // namespace strand
