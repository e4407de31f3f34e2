#include "strand/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "strand/text_io.hpp"

namespace strand {

namespace {

// first upward crossing of the threshold, linearly interpolated; NaN if none
double crossing_time(const std::vector<double>& t, const std::vector<double>& v,
                     double threshold) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (v[i - 1] < threshold && v[i] >= threshold) {
      const double frac = (threshold - v[i - 1]) / (v[i] - v[i - 1]);
      return t[i - 1] + frac * (t[i] - t[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const ProbeTrace& nearest_probe(const SimulationRecord& rec, double x) {
  if (rec.probes.empty()) throw std::invalid_argument("record has no probe traces");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rec.probes.size(); ++i) {
    if (std::abs(rec.probes[i].x - x) < std::abs(rec.probes[best].x - x)) best = i;
  }
  return rec.probes[best];
}

}  // namespace

CvEstimate conduction_velocity(const SimulationRecord& rec, double threshold,
                               double x_a, double x_b) {
  if (!(x_a < x_b)) throw std::invalid_argument("conduction_velocity: need x_a < x_b");
  const ProbeTrace& pa = nearest_probe(rec, x_a);
  const ProbeTrace& pb = nearest_probe(rec, x_b);
  CvEstimate est;
  est.x_a = pa.x;
  est.x_b = pb.x;
  est.threshold = threshold;
  est.t_a = crossing_time(rec.times, pa.v, threshold);
  est.t_b = crossing_time(rec.times, pb.v, threshold);
  est.propagating = std::isfinite(est.t_a) && std::isfinite(est.t_b) &&
                    est.t_b > est.t_a;
  est.cv = est.propagating ? (est.x_b - est.x_a) / (est.t_b - est.t_a) : 0.0;
  return est;
}

double wavefront_position(const Snapshot& snap, double threshold) {
  std::vector<double> x, v;
  snapshot_profile(snap, x, v);
  double front = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (v[i] > threshold) front = x[i];
  }
  return front;
}

double SteepnessSplit::ratio() const {
  return gap / std::max(cell, 1e-300);
}

SteepnessSplit steepness_split(const std::vector<double>& x,
                               const std::vector<double>& v,
                               const SubunitGeometry& geom) {
  if (x.size() < 2) throw std::invalid_argument("steepness_split: need >= 2 samples");
  SteepnessSplit s;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double slope = std::abs((v[i] - v[i - 1]) / (x[i] - x[i - 1]));
    const double xm = 0.5 * (x[i] + x[i - 1]);
    const bool in_gap = std::fmod(xm, geom.L) < geom.delta;
    (in_gap ? s.gap : s.cell) = std::max(in_gap ? s.gap : s.cell, slope);
  }
  return s;
}

double max_steepness(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() < 2) throw std::invalid_argument("max_steepness: need >= 2 samples");
  double m = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    m = std::max(m, std::abs((v[i] - v[i - 1]) / (x[i] - x[i - 1])));
  }
  return m;
}

double periodic_power_fraction(const std::vector<double>& x,
                               const std::vector<double>& v, double wavelength) {
  if (x.size() < 4) throw std::invalid_argument("periodic_power_fraction: profile too short");
  if (!(wavelength > 0.0)) throw std::invalid_argument("periodic_power_fraction: wavelength must be positive");
  const double span = x.back() - x.front();
  const long k = std::lround(span / wavelength);
  constexpr int n = 4096;
  if (k < 1 || k >= n / 2) {
    throw std::invalid_argument("periodic_power_fraction: wavelength outside resolvable band");
  }

  // uniform resample by linear interpolation
  std::vector<double> u(n);
  std::size_t seg = 1;
  for (int i = 0; i < n; ++i) {
    const double xi = x.front() + span * i / (n - 1);
    while (seg + 1 < x.size() && x[seg] < xi) ++seg;
    const double f = (xi - x[seg - 1]) / (x[seg] - x[seg - 1]);
    u[i] = v[seg - 1] + f * (v[seg] - v[seg - 1]);
  }
  double mean = 0.0;
  for (double ui : u) mean += ui;
  mean /= n;
  const double pi = std::acos(-1.0);
  double total = 0.0;
  std::complex<double> ck(0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    const double ui = u[i] - mean;
    total += ui * ui;
    const double ang = -2.0 * pi * static_cast<double>(k) * i / n;
    ck += ui * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  if (total <= 0.0) return 0.0;
  return 2.0 * std::norm(ck) / (static_cast<double>(n) * total);
}

ComparisonRow analyse_record(const SimulationRecord& rec, const SubunitGeometry& geom) {
  ComparisonRow row;
  row.model_id = rec.meta.model_id;
  row.solver = rec.meta.solver;
  row.stim_amplitude = rec.meta.stim_amplitude;
  row.max_conservation_residual = rec.meta.max_conservation_residual;

  const CvEstimate est = conduction_velocity(rec);
  row.cv = est.cv;
  row.propagating = est.propagating;

  const bool split_by_kind = rec.meta.solver == "discrete";
  if (const Snapshot* s30 = snapshot_at(rec, 30.0)) {
    std::vector<double> x, v;
    snapshot_profile(*s30, x, v);
    row.wavefront_30ms = wavefront_position(*s30);
    if (split_by_kind) {
      const SteepnessSplit s = steepness_split(x, v, geom);
      row.steepness_gap = s.gap;
      row.steepness_cell = s.cell;
      row.steepness_ratio = s.ratio();
    } else {
      row.steepness_gap = row.steepness_cell = max_steepness(x, v);
      row.steepness_ratio = 1.0;
    }
    row.periodic_power_30ms = periodic_power_fraction(x, v, geom.L);
  }
  if (const Snapshot* s15 = snapshot_at(rec, 15.0)) {
    std::vector<double> x, v;
    snapshot_profile(*s15, x, v);
    row.periodic_power_15ms = periodic_power_fraction(x, v, geom.L);
  }
  return row;
}

std::vector<ComparisonRow> compare_models(const std::vector<SimulationRecord>& recs,
                                          const SubunitGeometry& geom) {
  std::vector<ComparisonRow> rows;
  rows.reserve(recs.size());
  for (const SimulationRecord& r : recs) rows.push_back(analyse_record(r, geom));
  return rows;
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows) {
  std::string body =
      "model,solver,stim_amplitude_uA_mm2,cv_mm_ms,propagating,"
      "wavefront_30ms_mm,steepness_gap_mV_mm,steepness_cell_mV_mm,"
      "steepness_ratio,power_fraction_L_15ms,power_fraction_L_30ms,"
      "max_conservation_residual\n";
  for (const ComparisonRow& r : rows) {
    body += r.model_id + "," + r.solver + "," + format_double(r.stim_amplitude) +
            "," + format_double(r.cv) + "," + (r.propagating ? "1" : "0") + "," +
            format_double(r.wavefront_30ms) + "," +
            format_double(r.steepness_gap) + "," +
            format_double(r.steepness_cell) + "," +
            format_double(r.steepness_ratio) + "," +
            format_double(r.periodic_power_15ms) + "," +
            format_double(r.periodic_power_30ms) + "," +
            format_double(r.max_conservation_residual) + "\n";
  }
  atomic_write_file(path, body);
}

std::vector<ComparisonRow> read_comparison_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ComparisonRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 12) throw std::runtime_error("bad comparison row in " + path);
    ComparisonRow r;
    r.model_id = cols[0];
    r.solver = cols[1];
    r.stim_amplitude = std::stod(cols[2]);
    r.cv = std::stod(cols[3]);
    r.propagating = cols[4] == "1";
    r.wavefront_30ms = std::stod(cols[5]);
    r.steepness_gap = std::stod(cols[6]);
    r.steepness_cell = std::stod(cols[7]);
    r.steepness_ratio = std::stod(cols[8]);
    r.periodic_power_15ms = std::stod(cols[9]);
    r.periodic_power_30ms = std::stod(cols[10]);
    r.max_conservation_residual = std::stod(cols[11]);
    rows.push_back(r);
  }
  return rows;
}

namespace {

const ComparisonRow* find_row(const std::vector<ComparisonRow>& rows,
                              const std::string& model, const std::string& solver) {
  for (const ComparisonRow& r : rows) {
    if (r.model_id == model && r.solver == solver) return &r;
  }
  return nullptr;
}

std::string cv_str(const ComparisonRow* r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r->cv);
  return buf;
}

}  // namespace

std::string ordering_report(const std::vector<ComparisonRow>& rows) {
  std::string out;
  auto conclude = [&out](const std::string& claim, bool holds) {
    out += claim + (holds ? "  [holds]\n" : "  [FAILS]\n");
  };

  for (const std::string solver : {"discrete", "continuum"}) {
    const ComparisonRow* m1 = find_row(rows, "1", solver);
    const ComparisonRow* m2 = find_row(rows, "2", solver);
    const ComparisonRow* m3 = find_row(rows, "3", solver);
    const ComparisonRow* m4 = find_row(rows, "4", solver);
    const ComparisonRow* m5 = find_row(rows, "5", solver);
    const ComparisonRow* m6 = find_row(rows, "6", solver);
    if (m1 && m2) {
      conclude("cv(2," + solver + ") = " + cv_str(m2) + " < cv(1," + solver +
                   ") = " + cv_str(m1),
               m2->cv < m1->cv);
    }
    if (m1 && m3) {
      conclude("cv(3," + solver + ") = " + cv_str(m3) + " < cv(1," + solver +
                   ") = " + cv_str(m1),
               m3->cv < m1->cv);
    }
    if (m2 && m4) {
      conclude("cv(4," + solver + ") = " + cv_str(m4) + " < cv(2," + solver +
                   ") = " + cv_str(m2),
               m4->cv < m2->cv);
    }
    if (m3 && m5) {
      const double rel = std::abs(m5->cv - m3->cv) / m3->cv;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f%%", 100.0 * rel);
      conclude("|cv(5) - cv(3)|/cv(3) (" + solver + ") = " + buf + " < 1%",
               rel < 0.01);
    }
    if (m4 && m6) {
      const double rel = std::abs(m6->cv - m4->cv) / m4->cv;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f%%", 100.0 * rel);
      conclude("|cv(6) - cv(4)|/cv(4) (" + solver + ") = " + buf + " < 1%",
               rel < 0.01);
    }
    if (m1 && m2 && m3) {
      const double d12 = std::abs(m2->cv - m1->cv);
      const double d13 = std::abs(m3->cv - m1->cv);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.6f > %.6f", d13, d12);
      conclude("capacitance effect |cv(3)-cv(1)| exceeds ionic-switch effect "
               "|cv(2)-cv(1)| (" + solver + "): " + buf,
               d13 > d12);
    }
  }
  const ComparisonRow* d1 = find_row(rows, "1", "discrete");
  const ComparisonRow* c1 = find_row(rows, "1", "continuum");
  if (d1 && c1) {
    conclude("cv(1,discrete) = " + cv_str(d1) + " < cv(1,continuum) = " + cv_str(c1),
             d1->cv < c1->cv);
  }
  return out;
}

}  // namespace strand
