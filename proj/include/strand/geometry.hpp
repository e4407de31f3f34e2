#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace strand {

// Dimensions of the periodic strand subunit (mm) and discretisation counts.
// Each subunit is an L-by-h band whose lower h1 is intracellular; a slab of
// width delta at the low-x end of the intracellular strip models the gap
// junction. Fibres stack periodically in y.
struct SubunitGeometry {
  double L = 0.1;
  double h = 0.02;
  double h1 = 0.01;
  double delta = 0.001;
  int n_cells = 100;
  int n_fibres = 2;
  int nodes_per_cell = 160;  // intra + extra nodes per subunit, per fibre

  friend bool operator==(const SubunitGeometry&, const SubunitGeometry&) = default;
};

enum class MembraneKind : std::uint8_t { cell, gap };
enum class ConductivityLabel : std::uint8_t { intra, gap, extra };

// One coincident intra/extra node pair on a membrane interface.
struct MembranePair {
  int intra_node;
  int extra_node;
  double x;
};

// Lumped surface contribution of one element end to a pair. Contributions at
// a slab edge keep their own kind, so gap and cell surface areas are exact.
struct MembraneEntry {
  int pair;
  double weight;  // mm
  MembraneKind kind;
  double source_x;  // midpoint of the contributing element
};

// Bilinear quadrilateral, nodes ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1).
struct QuadElement {
  int n[4];
  ConductivityLabel label;
  double width, height;  // mm
};

struct StrandMesh {
  SubunitGeometry geom;
  std::vector<double> node_x, node_y;
  std::vector<bool> node_is_intra;
  std::vector<QuadElement> elements;
  std::vector<MembranePair> pairs;
  std::vector<MembraneEntry> entries;
  std::vector<double> x_grid;  // shared by every strip
  int nx_per_cell = 0;         // x elements per subunit
  int n_gap_elements = 0;      // of which inside the slab
  int ny_intra = 0, ny_extra = 0;

  int n_nodes() const { return static_cast<int>(node_x.size()); }
  int first_extra_node() const;  // lowest extracellular node index
};

// Structured mesh of the full strand: disjoint intra/extra node sets with
// coincident membrane pairs on the y = k*h and y = k*h + h1 faces (the last
// interface wraps periodically onto y = 0). Throws when the discretisation
// cannot resolve the slab or the geometry is degenerate.
StrandMesh build_mesh(const SubunitGeometry& g);

// Membrane surface per unit subunit volume, (chi_i, chi_g) in 1/mm:
// chi_i = 2(L-delta)/(L h), chi_g = 2 delta/(L h); the sum is always 2/h.
std::pair<double, double> surface_ratios(const SubunitGeometry& g);

// Conductivity region containing the point (x, y); y is taken modulo the
// fibre stack period.
ConductivityLabel conductivity_label_at(const SubunitGeometry& g, double x, double y);

// Sum of membrane entry weights for subunit k of one fibre, split by kind
// (cell, gap). Interior subunits satisfy cell = 2(L-delta), gap = 2*delta.
std::pair<double, double> subunit_surface_sums(const StrandMesh& m, int fibre, int k);

// Plain-text debug dump: nodes (id,x,y,domain) then elements then pairs.
void write_mesh_csv(const StrandMesh& m, const std::string& path);

}  // namespace strand
