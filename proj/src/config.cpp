#include "strand/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "strand/text_io.hpp"

namespace strand {

std::vector<ModelConfig> canonical_models() {
  return {
      {"Base", 0.175, 0.01, true},  {"1", 0.00175, 0.01, true},
      {"2", 0.00175, 0.01, false},  {"3", 0.00175, 0.001, true},
      {"4", 0.00175, 0.001, false}, {"5", 0.00175, 0.0, true},
      {"6", 0.00175, 0.0, false},
  };
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.models = canonical_models();
  return cfg;
}

const ModelConfig* find_model(const RunConfig& cfg, const std::string& id) {
  for (const ModelConfig& m : cfg.models) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };

  const SubunitGeometry& g = cfg.geometry;
  if (!(g.L > 0.0)) fail("geometry.L must be positive");
  if (!(g.h1 > 0.0 && g.h1 < g.h)) fail("geometry requires 0 < h1 < h");
  if (!(g.delta > 0.0 && g.delta < g.L)) fail("geometry requires 0 < delta < L");
  if (g.n_cells < 1) fail("geometry.n_cells must be >= 1");
  if (g.n_fibres < 1) fail("geometry.n_fibres must be >= 1");
  if (g.nodes_per_cell < 8) fail("geometry.nodes_per_cell must be >= 8");

  if (!(cfg.sigma_i > 0.0)) fail("sigma_i must be positive");
  if (!(cfg.sigma_e > 0.0)) fail("sigma_e must be positive");
  if (!(cfg.c_m > 0.0)) fail("c_m must be positive");
  if (!(cfg.dt > 0.0)) fail("dt must be positive");
  if (!(cfg.t_end > 0.0)) fail("t_end must be positive");
  if (!(cfg.stim_on >= 0.0 && cfg.stim_off > cfg.stim_on)) {
    fail("stimulus window must satisfy 0 <= stim_on < stim_off");
  }
  if (cfg.continuum_nodes < 4) fail("continuum_nodes must be >= 4");
  if (cfg.continuum_nodes_coarse < 4) fail("continuum_nodes_coarse must be >= 4");

  if (cfg.models.empty()) fail("no models selected");
  const std::vector<ModelConfig> canon = canonical_models();
  for (const ModelConfig& m : cfg.models) {
    if (!(m.sigma_g > 0.0)) fail("model " + m.id + ": sigma_g must be positive");
    if (m.c_g < 0.0) fail("model " + m.id + ": c_g must be >= 0");
    const ModelConfig* ref = nullptr;
    for (const ModelConfig& c : canon) {
      if (c.id == m.id) ref = &c;
    }
    if (!ref) fail("model " + m.id + ": unknown id (expected Base or 1..6)");
    if (!(m == *ref)) {
      fail("model " + m.id + ": parameters differ from the canonical table (" +
           format_double(ref->sigma_g) + ", " + format_double(ref->c_g) + ", " +
           (ref->i_g ? "1" : "0") + ")");
    }
    int count = 0;
    for (const ModelConfig& other : cfg.models) {
      if (other.id == m.id) ++count;
    }
    if (count != 1) fail("model " + m.id + " listed more than once");
  }
}

std::string emit_config(const RunConfig& cfg) {
  std::string s;
  s += "# strand experiment configuration\n";
  s += "# units: mm, ms, mS/mm, uF/mm^2\n\n";
  s += "[shared]\n";
  s += "sigma_i = " + format_double(cfg.sigma_i) + "   # intracellular conductivity (mS/mm)\n";
  s += "sigma_e = " + format_double(cfg.sigma_e) + "     # extracellular conductivity (mS/mm)\n";
  s += "c_m = " + format_double(cfg.c_m) + "        # cell membrane capacitance (uF/mm^2)\n";
  s += "dt = " + format_double(cfg.dt) + "          # time step (ms)\n";
  s += "t_end = " + format_double(cfg.t_end) + "         # simulated duration (ms)\n";
  s += "stim_on = " + format_double(cfg.stim_on) + "        # stimulus window start (ms)\n";
  s += "stim_off = " + format_double(cfg.stim_off) + "      # stimulus window end (ms)\n";
  s += "continuum_nodes = " + std::to_string(cfg.continuum_nodes) +
       "   # converged continuum grid\n";
  s += "continuum_nodes_coarse = " + std::to_string(cfg.continuum_nodes_coarse) +
       "   # coarse grid, reported alongside\n";
  s += "\n[geometry]\n";
  s += "L = " + format_double(cfg.geometry.L) + "           # subunit length (mm)\n";
  s += "h = " + format_double(cfg.geometry.h) + "          # subunit height (mm)\n";
  s += "h1 = " + format_double(cfg.geometry.h1) + "         # intracellular height (mm)\n";
  s += "delta = " + format_double(cfg.geometry.delta) + "     # gap-junction width (mm)\n";
  s += "n_cells = " + std::to_string(cfg.geometry.n_cells) + "\n";
  s += "n_fibres = " + std::to_string(cfg.geometry.n_fibres) + "\n";
  s += "nodes_per_cell = " + std::to_string(cfg.geometry.nodes_per_cell) + "\n";
  for (const ModelConfig& m : cfg.models) {
    s += "\n[model " + m.id + "]\n";
    s += "sigma_g = " + format_double(m.sigma_g) + "   # gap-junction conductivity (mS/mm)\n";
    s += "c_g = " + format_double(m.c_g) + "       # gap membrane capacitance (uF/mm^2)\n";
    s += "i_g = " + std::string(m.i_g ? "1" : "0") +
         "          # gap membrane carries ionic current\n";
  }
  return s;
}

namespace {

struct Cursor {
  int line_no = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + msg);
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& val, const Cursor& cur) {
  try {
    std::size_t used = 0;
    const double x = std::stod(val, &used);
    if (used != val.size()) cur.fail("trailing characters after number '" + val + "'");
    return x;
  } catch (const std::invalid_argument&) {
    cur.fail("expected a number, got '" + val + "'");
  } catch (const std::out_of_range&) {
    cur.fail("number out of range: '" + val + "'");
  }
}

int parse_int(const std::string& val, const Cursor& cur) {
  const double x = parse_number(val, cur);
  const int i = static_cast<int>(std::lround(x));
  if (x != i) cur.fail("expected an integer, got '" + val + "'");
  return i;
}

bool parse_flag(const std::string& val, const Cursor& cur) {
  if (val == "1" || val == "true") return true;
  if (val == "0" || val == "false") return false;
  cur.fail("expected 0/1, got '" + val + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg = default_config();
  cfg.models.clear();

  std::istringstream in(text);
  std::string raw;
  Cursor cur;
  std::string section = "shared";
  ModelConfig* model = nullptr;

  while (std::getline(in, raw)) {
    ++cur.line_no;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') cur.fail("unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "shared" || name == "geometry") {
        section = name;
        model = nullptr;
      } else if (name.rfind("model", 0) == 0) {
        const std::string id = trim(name.substr(5));
        if (id.empty()) cur.fail("model section needs an id: [model <id>]");
        cfg.models.push_back(ModelConfig{id, 0.0, 0.0, false});
        model = &cfg.models.back();
        section = "model";
      } else {
        cur.fail("unknown section [" + name + "]");
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) cur.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) cur.fail("expected 'key = value'");

    if (section == "shared") {
      if (key == "sigma_i") cfg.sigma_i = parse_number(val, cur);
      else if (key == "sigma_e") cfg.sigma_e = parse_number(val, cur);
      else if (key == "c_m") cfg.c_m = parse_number(val, cur);
      else if (key == "dt") cfg.dt = parse_number(val, cur);
      else if (key == "t_end") cfg.t_end = parse_number(val, cur);
      else if (key == "stim_on") cfg.stim_on = parse_number(val, cur);
      else if (key == "stim_off") cfg.stim_off = parse_number(val, cur);
      else if (key == "continuum_nodes") cfg.continuum_nodes = parse_int(val, cur);
      else if (key == "continuum_nodes_coarse") cfg.continuum_nodes_coarse = parse_int(val, cur);
      else cur.fail("unknown key '" + key + "' in [shared]");
    } else if (section == "geometry") {
      if (key == "L") cfg.geometry.L = parse_number(val, cur);
      else if (key == "h") cfg.geometry.h = parse_number(val, cur);
      else if (key == "h1") cfg.geometry.h1 = parse_number(val, cur);
      else if (key == "delta") cfg.geometry.delta = parse_number(val, cur);
      else if (key == "n_cells") cfg.geometry.n_cells = parse_int(val, cur);
      else if (key == "n_fibres") cfg.geometry.n_fibres = parse_int(val, cur);
      else if (key == "nodes_per_cell") cfg.geometry.nodes_per_cell = parse_int(val, cur);
      else cur.fail("unknown key '" + key + "' in [geometry]");
    } else {
      if (key == "sigma_g") model->sigma_g = parse_number(val, cur);
      else if (key == "c_g") model->c_g = parse_number(val, cur);
      else if (key == "i_g") model->i_g = parse_flag(val, cur);
      else cur.fail("unknown key '" + key + "' in [model " + model->id + "]");
    }
  }

  if (cfg.models.empty()) cfg.models = canonical_models();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace strand
