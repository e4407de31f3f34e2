#include "strand/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "strand/text_io.hpp"

namespace strand {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                          "#bcbd22", "#e377c2"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// largest "nice" step (1/2/5 times a power of ten) giving >= 4 intervals
double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0}) {
    if (mag * m <= raw) return mag * m;
  }
  return mag;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<Series>& series) {
  double x0 = spec.x_min, x1 = spec.x_max;
  double y0 = spec.y_min, y1 = spec.y_max;
  if (!(x0 < x1) || !(y0 < y1)) {
    double dx0 = std::numeric_limits<double>::infinity(), dx1 = -dx0;
    double dy0 = dx0, dy1 = -dx0;
    for (const Series& s : series) {
      for (double v : s.x) { dx0 = std::min(dx0, v); dx1 = std::max(dx1, v); }
      for (double v : s.y) { dy0 = std::min(dy0, v); dy1 = std::max(dy1, v); }
    }
    if (!(dx0 < dx1)) { dx0 -= 1.0; dx1 += 1.0; }
    if (!(dy0 < dy1)) { dy0 -= 1.0; dy1 += 1.0; }
    if (!(x0 < x1)) { x0 = dx0; x1 = dx1; }
    if (!(y0 < y1)) {
      const double pad = 0.05 * (dy1 - dy0);
      y0 = dy0 - pad;
      y1 = dy1 + pad;
    }
  }

  const double ml = 70, mr = 20, mt = spec.title.empty() ? 20 : 44, mb = 50;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto sx = [&](double x) { return ml + pw * (x - x0) / (x1 - x0); };
  auto sy = [&](double y) { return mt + ph * (1.0 - (y - y0) / (y1 - y0)); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
       "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
       std::to_string(spec.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<clipPath id=\"plot\"><rect x=\"" + px(ml) + "\" y=\"" + px(mt) +
       "\" width=\"" + px(pw) + "\" height=\"" + px(ph) + "\"/></clipPath>\n";

  if (!spec.title.empty()) {
    s += "<text x=\"" + px(ml + pw / 2) +
         "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"17\">" + escape_xml(spec.title) + "</text>\n";
  }

  // gridlines and tick labels
  const double xstep = nice_step(x1 - x0);
  const double ystep = nice_step(y1 - y0);
  s += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (double t = std::ceil(x0 / xstep) * xstep; t <= x1 + 1e-9 * xstep; t += xstep) {
    const double gx = sx(t);
    s += "<line x1=\"" + px(gx) + "\" y1=\"" + px(mt) + "\" x2=\"" + px(gx) +
         "\" y2=\"" + px(mt + ph) + "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + px(gx) + "\" y=\"" + px(mt + ph + 18) +
         "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
  }
  for (double t = std::ceil(y0 / ystep) * ystep; t <= y1 + 1e-9 * ystep; t += ystep) {
    const double gy = sy(t);
    s += "<line x1=\"" + px(ml) + "\" y1=\"" + px(gy) + "\" x2=\"" + px(ml + pw) +
         "\" y2=\"" + px(gy) + "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + px(ml - 8) + "\" y=\"" + px(gy + 4) +
         "\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
  }
  s += "</g>\n";

  // frame and axis labels
  s += "<rect x=\"" + px(ml) + "\" y=\"" + px(mt) + "\" width=\"" + px(pw) +
       "\" height=\"" + px(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  s += "<text x=\"" + px(ml + pw / 2) + "\" y=\"" + px(spec.height - 12.0) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       escape_xml(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + px(mt + ph / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
       "transform=\"rotate(-90 18 " + px(mt + ph / 2) + ")\">" +
       escape_xml(spec.y_label) + "</text>\n";

  // curves
  s += "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.6\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& sr = series[i];
    if (sr.x.size() != sr.y.size()) {
      throw std::invalid_argument("write_svg_plot: series '" + sr.label +
                                  "' has mismatched x/y lengths");
    }
    const std::string colour =
        sr.colour.empty() ? kPalette[i % (sizeof kPalette / sizeof *kPalette)]
                          : sr.colour;
    s += "<polyline stroke=\"" + colour + "\" points=\"";
    for (std::size_t j = 0; j < sr.x.size(); ++j) {
      if (j) s += " ";
      s += px(sx(sr.x[j])) + "," + px(sy(sr.y[j]));
    }
    s += "\"/>\n";
  }
  s += "</g>\n";

  // legend
  s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = mt + 14;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& sr = series[i];
    if (sr.label.empty()) continue;
    const std::string colour =
        sr.colour.empty() ? kPalette[i % (sizeof kPalette / sizeof *kPalette)]
                          : sr.colour;
    const double lx = ml + pw - 150;
    s += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" +
         px(lx + 22) + "\" y2=\"" + px(ly - 4) + "\" stroke=\"" + colour +
         "\" stroke-width=\"2.5\"/>\n";
    s += "<text x=\"" + px(lx + 28) + "\" y=\"" + px(ly) + "\">" +
         escape_xml(sr.label) + "</text>\n";
    ly += 17;
  }
  s += "</g>\n</svg>\n";

  atomic_write_file(path, s);
}

}  // namespace strand
