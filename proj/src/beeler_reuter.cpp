#include "strand/beeler_reuter.hpp"

#include <cmath>
#include <stdexcept>

namespace strand {

namespace {

// (V+47)/(1 - exp(-0.1(V+47))) has a removable singularity at V = -47 with
// limit 10; the same guard pattern applies to the second i_K1 term at V = -23.
double ratio_with_limit(double u, double k, double limit) {
  if (std::abs(u) < 1e-7) return limit;
  return u / (1.0 - std::exp(-k * u));
}

double e_s(double ca) { return -82.3 - 13.0287 * std::log(ca); }

double slow_inward(const BrState& s, const IonicCurrentParams& p) {
  return p.g_s * s.d * s.f * (s.v - e_s(s.ca));
}

double dca_dt(const BrState& s, const IonicCurrentParams& p) {
  return -1e-7 * slow_inward(s, p) + 0.07 * (1e-7 - s.ca);
}

}  // namespace

GateRates gate_rates(double v) {
  GateRates r;
  r.a_m = ratio_with_limit(v + 47.0, 0.1, 10.0);
  r.b_m = 40.0 * std::exp(-0.056 * (v + 72.0));
  r.a_h = 0.126 * std::exp(-0.25 * (v + 77.0));
  r.b_h = 1.7 / (std::exp(-0.082 * (v + 22.5)) + 1.0);
  r.a_j = 0.055 * std::exp(-0.25 * (v + 78.0)) /
          (std::exp(-0.2 * (v + 78.0)) + 1.0);
  r.b_j = 0.3 / (std::exp(-0.1 * (v + 32.0)) + 1.0);
  r.a_d = 0.095 * std::exp(-0.01 * (v - 5.0)) /
          (std::exp(-0.072 * (v - 5.0)) + 1.0);
  r.b_d = 0.07 * std::exp(-0.017 * (v + 44.0)) /
          (std::exp(0.05 * (v + 44.0)) + 1.0);
  r.a_f = 0.012 * std::exp(-0.008 * (v + 28.0)) /
          (std::exp(0.15 * (v + 28.0)) + 1.0);
  r.b_f = 0.0065 * std::exp(-0.02 * (v + 30.0)) /
          (std::exp(-0.2 * (v + 30.0)) + 1.0);
  r.a_x1 = 0.0005 * std::exp(0.083 * (v + 50.0)) /
           (std::exp(0.057 * (v + 50.0)) + 1.0);
  r.b_x1 = 0.0013 * std::exp(-0.06 * (v + 20.0)) /
           (std::exp(-0.04 * (v + 20.0)) + 1.0);
  return r;
}

double ionic_current(const BrState& s, const IonicCurrentParams& p) {
  const double v = s.v;
  const double i_k1 =
      p.g_k1 * (4.0 * (std::exp(0.04 * (v + 85.0)) - 1.0) /
                    (std::exp(0.08 * (v + 53.0)) + std::exp(0.04 * (v + 53.0))) +
                0.2 * ratio_with_limit(v + 23.0, 0.04, 25.0));
  const double i_x1 = s.x1 * p.g_x1 * (std::exp(0.04 * (v + 77.0)) - 1.0) /
                      std::exp(0.04 * (v + 35.0));
  const double i_na = (p.g_na * s.m * s.m * s.m * s.h * s.j + p.g_nac) * (v - 50.0);
  const double i_s = slow_inward(s, p);
  return p.current_scale * (i_k1 + i_x1 + i_na + i_s);
}

BrState step_gates(const BrState& s, double v, double dt,
                   const IonicCurrentParams& p) {
  if (!std::isfinite(v)) {
    throw std::runtime_error("step_gates: non-finite membrane potential");
  }
  const GateRates r = gate_rates(v);
  BrState out = s;
  out.v = v;
  auto advance = [dt](double g, double a, double b) {
    const double ginf = a / (a + b);
    const double tau = 1.0 / (a + b);
    return ginf + (g - ginf) * std::exp(-dt / tau);
  };
  out.m = advance(s.m, r.a_m, r.b_m);
  out.h = advance(s.h, r.a_h, r.b_h);
  out.j = advance(s.j, r.a_j, r.b_j);
  out.d = advance(s.d, r.a_d, r.b_d);
  out.f = advance(s.f, r.a_f, r.b_f);
  out.x1 = advance(s.x1, r.a_x1, r.b_x1);
  BrState at_v = s;
  at_v.v = v;
  out.ca = s.ca + dt * dca_dt(at_v, p);
  return out;
}

namespace {

BrState steady_state_at(double v, const IonicCurrentParams& p) {
  const GateRates r = gate_rates(v);
  BrState s;
  s.v = v;
  s.m = r.a_m / (r.a_m + r.b_m);
  s.h = r.a_h / (r.a_h + r.b_h);
  s.j = r.a_j / (r.a_j + r.b_j);
  s.d = r.a_d / (r.a_d + r.b_d);
  s.f = r.a_f / (r.a_f + r.b_f);
  s.x1 = r.a_x1 / (r.a_x1 + r.b_x1);
  // calcium equilibrium: 0 = -1e-7 i_s(ca) + 0.07 (1e-7 - ca), fixed point
  double ca = 1e-7;
  for (int it = 0; it < 400; ++it) {
    BrState probe = s;
    probe.ca = ca;
    const double next = 1e-7 - (1e-7 / 0.07) * slow_inward(probe, p);
    if (std::abs(next - ca) < 1e-24) {
      ca = next;
      break;
    }
    ca = next;
  }
  if (!(ca > 0.0)) throw std::runtime_error("resting_state: calcium fixed point failed");
  s.ca = ca;
  return s;
}

}  // namespace

BrState resting_state(const IonicCurrentParams& p) {
  auto current_at = [&p](double v) { return ionic_current(steady_state_at(v, p), p); };
  double lo = -95.0, hi = -70.0;
  double f_lo = current_at(lo), f_hi = current_at(hi);
  if (f_lo * f_hi > 0.0) {
    throw std::runtime_error("resting_state: no sign change in [-95, -70] mV");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = current_at(mid);
    if (f_lo * f_mid <= 0.0) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
    if (hi - lo < 1e-13) break;
  }
  return steady_state_at(0.5 * (lo + hi), p);
}

std::array<double, 8> state_derivative(const BrState& s, double i_stim,
                                       double c_m, const IonicCurrentParams& p) {
  const GateRates r = gate_rates(s.v);
  return {(-ionic_current(s, p) + i_stim) / c_m,
          r.a_m * (1.0 - s.m) - r.b_m * s.m,
          r.a_h * (1.0 - s.h) - r.b_h * s.h,
          r.a_j * (1.0 - s.j) - r.b_j * s.j,
          r.a_d * (1.0 - s.d) - r.b_d * s.d,
          r.a_f * (1.0 - s.f) - r.b_f * s.f,
          r.a_x1 * (1.0 - s.x1) - r.b_x1 * s.x1,
          dca_dt(s, p)};
}

}  // namespace strand
