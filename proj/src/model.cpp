#include "gapwfr/model.hpp"

#include <algorithm>
#include <cmath>

namespace gapwfr {
namespace {

// x / (1 - exp(-x / k)) with the removable singularity at x = 0.
inline double vtrap(double x, double k) {
  const double r = x / k;
  if (std::abs(r) < 1e-6) return k * (1.0 + 0.5 * r);
  return x / (1.0 - std::exp(-r));
}

struct Rates {
  double am, bm, ah, bh, an, bn, ap, bp;
};

Rates rates(double V, ChannelSet channels) {
  Rates r{};
  if (channels == ChannelSet::kv3_gap) {
    r.am = 40.0 * vtrap(V - 75.5, 13.5);
    r.bm = 1.2262 * std::exp(-V / 42.248);
    r.ah = 0.0035 * std::exp(-V / 24.186);
    r.bh = 0.017 * vtrap(V + 51.25, 5.2);
    r.ap = vtrap(V - 95.0, 11.8);
    r.bp = 0.025 * std::exp(-V / 22.222);
    r.an = 0.014 * vtrap(V + 44.0, 2.3);
    r.bn = 0.0043 * std::exp(-(V + 44.0) / 34.0);
  } else {
    r.am = 0.1 * vtrap(V + 40.0, 10.0);
    r.bm = 4.0 * std::exp(-(V + 65.0) / 18.0);
    r.ah = 0.07 * std::exp(-(V + 65.0) / 20.0);
    r.bh = 1.0 / (1.0 + std::exp(-(V + 35.0) / 10.0));
    r.an = 0.01 * vtrap(V + 55.0, 10.0);
    r.bn = 0.125 * std::exp(-(V + 65.0) / 80.0);
    r.ap = 0.0;
    r.bp = 1.0;
  }
  return r;
}

double ionic_current(double V, double m, double h, double n, double p, const NeuronParams& P) {
  const double I_Na = P.g_Na * m * m * m * h * (V - P.E_Na);
  const double g_Kv3 = P.channels == ChannelSet::kv3_gap ? P.g_Kv3 : 0.0;
  const double I_K = (P.g_K * n * n * n * n + g_Kv3 * p * p) * (V - P.E_K);
  const double I_L = P.g_L * (V - P.E_L);
  return I_Na + I_K + I_L;
}

// Net membrane current with all gates at their steady-state values.
double steady_current(double V, const NeuronParams& P) {
  const Rates r = rates(V, P.channels);
  const double m = r.am / (r.am + r.bm);
  const double h = r.ah / (r.ah + r.bh);
  const double n = r.an / (r.an + r.bn);
  const double p = r.ap / (r.ap + r.bp);
  return P.I_ext - ionic_current(V, m, h, n, p, P);
}

}  // namespace

void NeuronParams::validate() const {
  if (!(C_m > 0.0)) throw ConfigError("membrane capacitance must be positive");
  if (g_Na < 0.0 || g_K < 0.0 || g_Kv3 < 0.0 || g_L < 0.0)
    throw ConfigError("conductances must be non-negative");
  if (!(tau_syn > 0.0)) throw ConfigError("synaptic time constant must be positive");
  if (!std::isfinite(theta) || !std::isfinite(V_spike) || !std::isfinite(I_ext))
    throw ConfigError("thresholds and input current must be finite");
}

NeuronParams NeuronParams::squid_axon() {
  NeuronParams p;
  p.channels = ChannelSet::squid_axon;
  p.C_m = 100.0;
  p.g_Na = 12000.0;
  p.g_K = 3600.0;
  p.g_Kv3 = 0.0;
  p.g_L = 30.0;
  p.E_Na = 50.0;
  p.E_K = -77.0;
  p.E_L = -54.402;
  return p;
}

StateVector hh_rhs(const StateVector& y, const NeuronParams& P, double gap_input,
                   double syn_input) {
  if (!y.allFinite() || !std::isfinite(gap_input) || !std::isfinite(syn_input))
    throw SolverError("non-finite input to the vector field");
  const double V = y[kV];
  const Rates r = rates(V, P.channels);
  StateVector dy;
  const double I_ion = ionic_current(V, y[kM], y[kH], y[kN], y[kP], P);
  dy[kV] = (-I_ion + P.I_ext + y[kSyn] + syn_input + gap_input) / P.C_m;
  dy[kM] = r.am * (1.0 - y[kM]) - r.bm * y[kM];
  dy[kH] = r.ah * (1.0 - y[kH]) - r.bh * y[kH];
  dy[kN] = r.an * (1.0 - y[kN]) - r.bn * y[kN];
  dy[kP] = P.channels == ChannelSet::kv3_gap ? r.ap * (1.0 - y[kP]) - r.bp * y[kP] : 0.0;
  dy[kSyn] = -y[kSyn] / P.tau_syn;
  return dy;
}

void apply_spike(StateVector& y, double weight) { y[kSyn] += weight; }

NeuronState apply_spike(NeuronState state, double weight) {
  apply_spike(state.y, weight);
  return state;
}

StateVector resting_state(const NeuronParams& P) {
  P.validate();
  constexpr double kLow = -120.0;
  constexpr double kHigh = 60.0;
  constexpr double kScan = 0.05;
  double lo = kLow;
  double f_lo = steady_current(lo, P);
  double hi = lo;
  bool bracketed = false;
  for (double v = kLow + kScan; v <= kHigh; v += kScan) {
    const double f = steady_current(v, P);
    if ((f_lo > 0.0) != (f > 0.0)) {
      hi = v;
      bracketed = true;
      break;
    }
    lo = v;
    f_lo = f;
  }
  if (!bracketed) throw SolverError("no equilibrium potential found");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = steady_current(mid, P);
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  const double V = 0.5 * (lo + hi);
  const Rates r = rates(V, P.channels);
  StateVector y;
  y[kV] = V;
  y[kM] = r.am / (r.am + r.bm);
  y[kH] = r.ah / (r.ah + r.bh);
  y[kN] = r.an / (r.an + r.bn);
  y[kP] = r.ap / (r.ap + r.bp);
  y[kSyn] = 0.0;
  return y;
}

void clamp_gating(StateVector& y) {
  for (int i = kM; i <= kP; ++i) y[i] = std::clamp(y[i], 0.0, 1.0);
}

void require_finite(const StateVector& y, const std::string& where) {
  if (!y.allFinite()) throw SolverError("non-finite state in " + where);
}

}  // namespace gapwfr
