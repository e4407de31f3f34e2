#pragma once

#include <string>
#include <vector>

#include "strand/geometry.hpp"

namespace strand {

// One row of the model table: the gap-junction parameters varied across the
// experiment matrix. Shared parameters live in RunConfig.
struct ModelConfig {
  std::string id;        // "Base" or "1".."6"
  double sigma_g = 0.0;  // gap-junction conductivity (mS/mm)
  double c_g = 0.0;      // gap-junction membrane capacitance (uF/mm^2)
  bool i_g = false;      // gap-junction membrane carries ionic current

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Full experiment configuration: geometry, shared electrical parameters,
// solver settings, and the list of models to run.
struct RunConfig {
  SubunitGeometry geometry;

  double sigma_i = 0.175;  // intracellular conductivity (mS/mm)
  double sigma_e = 0.7;    // extracellular conductivity (mS/mm)
  double c_m = 0.01;       // cell membrane capacitance (uF/mm^2)

  double dt = 0.01;      // time step (ms)
  double t_end = 50.0;   // simulated duration (ms)
  double stim_on = 5.0;  // stimulus window (ms)
  double stim_off = 10.0;

  // converged grid used for all quantitative comparisons, plus the coarse
  // historical grid that is additionally run and reported
  int continuum_nodes = 801;
  int continuum_nodes_coarse = 80;

  std::vector<ModelConfig> models;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// The canonical seven-row model table.
std::vector<ModelConfig> canonical_models();

// Defaults matching the reference experiment: 100x2 subunits, seven models.
RunConfig default_config();

const ModelConfig* find_model(const RunConfig& cfg, const std::string& id);

// Throws std::invalid_argument with a per-field diagnostic if the config is
// inconsistent. Model rows must match the canonical table: the matrix is
// defined by which rows are selected, not by editing their parameters.
void validate_config(const RunConfig& cfg);

// Plain-text round-trip: parse(emit(cfg)) == cfg. Format is line-based
// "key = value" with [shared], [geometry] and [model <id>] sections and
// '#' comments. Parse errors carry 1-based line numbers.
std::string emit_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

}  // namespace strand
