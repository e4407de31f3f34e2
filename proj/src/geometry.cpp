#include "strand/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace strand {

namespace {

struct Layout {
  int ny;       // element rows per strip (same for intra and extra)
  int nx;       // x elements per subunit
  int n_gap;    // of which in the slab
  int rows_per_fibre() const { return 2 * (ny + 1); }
};

Layout derive_layout(const SubunitGeometry& g) {
  if (!(g.h1 > 0.0) || !(g.h1 < g.h)) {
    throw std::invalid_argument("geometry: require 0 < h1 < h");
  }
  if (!(g.delta > 0.0) || !(g.delta < g.L)) {
    throw std::invalid_argument("geometry: require 0 < delta < L");
  }
  if (g.n_cells < 1 || g.n_fibres < 1) {
    throw std::invalid_argument("geometry: require n_cells >= 1 and n_fibres >= 1");
  }
  Layout lay;
  lay.ny = std::max(2, static_cast<int>(std::lround(std::sqrt(g.nodes_per_cell / 18.0))));
  lay.nx = static_cast<int>(std::lround(g.nodes_per_cell / (2.0 * lay.ny + 2.0)));
  lay.n_gap = std::max(2, static_cast<int>(std::lround(lay.nx * g.delta / g.L)));
  if (lay.nx - lay.n_gap < 2) {
    throw std::runtime_error(
        "geometry: gap junction unresolved, nodes_per_cell too small to give the "
        "slab two elements and the cell body two more");
  }
  return lay;
}

}  // namespace

int StrandMesh::first_extra_node() const {
  const int nx_nodes = static_cast<int>(x_grid.size());
  return (ny_intra + 1) * nx_nodes;
}

std::pair<double, double> surface_ratios(const SubunitGeometry& g) {
  if (!(g.h1 > 0.0) || !(g.h1 < g.h) || g.delta < 0.0 || g.delta > g.L) {
    throw std::invalid_argument("surface_ratios: invalid geometry");
  }
  const double chi_i = 2.0 * (g.L - g.delta) / (g.L * g.h);
  const double chi_g = 2.0 * g.delta / (g.L * g.h);
  return {chi_i, chi_g};
}

ConductivityLabel conductivity_label_at(const SubunitGeometry& g, double x, double y) {
  const double period = g.n_fibres * g.h;
  double yy = std::fmod(y, period);
  if (yy < 0.0) yy += period;
  const double in_fibre = std::fmod(yy, g.h);
  if (in_fibre > g.h1) return ConductivityLabel::extra;
  double xx = std::fmod(x, g.L);
  if (xx < 0.0) xx += g.L;
  return xx < g.delta ? ConductivityLabel::gap : ConductivityLabel::intra;
}

StrandMesh build_mesh(const SubunitGeometry& g) {
  const Layout lay = derive_layout(g);
  StrandMesh m;
  m.geom = g;
  m.nx_per_cell = lay.nx;
  m.n_gap_elements = lay.n_gap;
  m.ny_intra = lay.ny;
  m.ny_extra = lay.ny;

  // Shared x grid: per subunit, n_gap uniform elements across the slab and
  // nx - n_gap across the cell body, so the slab edge always falls on a node.
  m.x_grid.reserve(g.n_cells * lay.nx + 1);
  m.x_grid.push_back(0.0);
  for (int k = 0; k < g.n_cells; ++k) {
    const double x0 = k * g.L;
    for (int i = 1; i <= lay.n_gap; ++i) {
      m.x_grid.push_back(x0 + g.delta * i / lay.n_gap);
    }
    const int n_body = lay.nx - lay.n_gap;
    for (int i = 1; i <= n_body; ++i) {
      m.x_grid.push_back(x0 + g.delta + (g.L - g.delta) * i / n_body);
    }
  }
  const int nxn = static_cast<int>(m.x_grid.size());

  const int rows_per_fibre = lay.rows_per_fibre();
  const int n_nodes = g.n_fibres * rows_per_fibre * nxn;
  m.node_x.resize(n_nodes);
  m.node_y.resize(n_nodes);
  m.node_is_intra.assign(n_nodes, false);

  auto node_id = [&](int fibre, bool intra, int row, int jx) {
    const int row_base = fibre * rows_per_fibre + (intra ? 0 : lay.ny + 1);
    return (row_base + row) * nxn + jx;
  };

  const double dy_i = g.h1 / lay.ny;
  const double dy_e = (g.h - g.h1) / lay.ny;
  for (int f = 0; f < g.n_fibres; ++f) {
    for (int r = 0; r <= lay.ny; ++r) {
      for (int jx = 0; jx < nxn; ++jx) {
        const int ni = node_id(f, true, r, jx);
        m.node_x[ni] = m.x_grid[jx];
        m.node_y[ni] = f * g.h + r * dy_i;
        m.node_is_intra[ni] = true;
        const int ne = node_id(f, false, r, jx);
        m.node_x[ne] = m.x_grid[jx];
        m.node_y[ne] = f * g.h + g.h1 + r * dy_e;
      }
    }
  }

  const int n_xel = nxn - 1;
  m.elements.reserve(static_cast<std::size_t>(g.n_fibres) * 2 * lay.ny * n_xel);
  for (int f = 0; f < g.n_fibres; ++f) {
    for (int strip = 0; strip < 2; ++strip) {
      const bool intra = strip == 0;
      for (int r = 0; r < lay.ny; ++r) {
        for (int e = 0; e < n_xel; ++e) {
          QuadElement q;
          q.n[0] = node_id(f, intra, r, e);
          q.n[1] = node_id(f, intra, r, e + 1);
          q.n[2] = node_id(f, intra, r + 1, e);
          q.n[3] = node_id(f, intra, r + 1, e + 1);
          q.width = m.x_grid[e + 1] - m.x_grid[e];
          q.height = intra ? dy_i : dy_e;
          q.label = !intra ? ConductivityLabel::extra
                           : (e % lay.nx < lay.n_gap ? ConductivityLabel::gap
                                                     : ConductivityLabel::intra);
          m.elements.push_back(q);
        }
      }
    }
  }

  // Membrane interfaces, two per fibre: the top of each intracellular strip
  // against its own extracellular strip, and the top of that extracellular
  // strip against the next fibre's intracellular floor (periodic in y).
  m.pairs.reserve(static_cast<std::size_t>(2 * g.n_fibres) * nxn);
  m.entries.reserve(static_cast<std::size_t>(2 * g.n_fibres) * 2 * n_xel);
  for (int f = 0; f < g.n_fibres; ++f) {
    const int f_up = (f + 1) % g.n_fibres;
    for (int side = 0; side < 2; ++side) {
      const int base = static_cast<int>(m.pairs.size());
      for (int jx = 0; jx < nxn; ++jx) {
        MembranePair pr;
        pr.intra_node = side == 0 ? node_id(f, true, lay.ny, jx)
                                  : node_id(f_up, true, 0, jx);
        pr.extra_node = side == 0 ? node_id(f, false, 0, jx)
                                  : node_id(f, false, lay.ny, jx);
        pr.x = m.x_grid[jx];
        m.pairs.push_back(pr);
      }
      for (int e = 0; e < n_xel; ++e) {
        const double w = 0.5 * (m.x_grid[e + 1] - m.x_grid[e]);
        const MembraneKind kind =
            e % lay.nx < lay.n_gap ? MembraneKind::gap : MembraneKind::cell;
        const double mid = 0.5 * (m.x_grid[e] + m.x_grid[e + 1]);
        m.entries.push_back({base + e, w, kind, mid});
        m.entries.push_back({base + e + 1, w, kind, mid});
      }
    }
  }
  return m;
}

std::pair<double, double> subunit_surface_sums(const StrandMesh& m, int fibre, int k) {
  const int nxn = static_cast<int>(m.x_grid.size());
  const int nf = m.geom.n_fibres;
  // interfaces touching fibre's intracellular strip: its own top (ordinal
  // 2*fibre) and the wrap interface below it (ordinal 2*((fibre-1+nf)%nf)+1)
  const int top = 2 * fibre;
  const int bottom = 2 * ((fibre - 1 + nf) % nf) + 1;
  double cell = 0.0, gap = 0.0;
  for (const MembraneEntry& en : m.entries) {
    const int interface = en.pair / nxn;
    if (interface != top && interface != bottom) continue;
    if (static_cast<int>(std::floor(en.source_x / m.geom.L)) != k) continue;
    (en.kind == MembraneKind::gap ? gap : cell) += en.weight;
  }
  return {cell, gap};
}

void write_mesh_csv(const StrandMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh_csv: cannot open " + path);
  out << "# nodes: id,x_mm,y_mm,domain\n";
  for (int i = 0; i < m.n_nodes(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s\n", i, m.node_x[i],
                  m.node_y[i], m.node_is_intra[i] ? "intra" : "extra");
    out << buf;
  }
  out << "# elements: n00,n10,n01,n11,label\n";
  for (const QuadElement& q : m.elements) {
    const char* lab = q.label == ConductivityLabel::intra   ? "intra"
                      : q.label == ConductivityLabel::gap   ? "gap"
                                                            : "extra";
    out << q.n[0] << ',' << q.n[1] << ',' << q.n[2] << ',' << q.n[3] << ','
        << lab << '\n';
  }
  out << "# pairs: intra_node,extra_node,x_mm\n";
  for (const MembranePair& p : m.pairs) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", p.intra_node, p.extra_node, p.x);
    out << buf;
  }
}

}  // namespace strand
