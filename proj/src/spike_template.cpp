#include "gapwfr/spike_template.hpp"

#include "gapwfr/rk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace gapwfr {

double SpikeShapeTemplate::rising_offset(double v) const {
  if (v <= V.front()) return 0.0;
  if (v >= V[peak]) return peak_offset();
  const auto first = V.begin();
  const auto last = V.begin() + static_cast<std::ptrdiff_t>(peak) + 1;
  const auto it = std::upper_bound(first, last, v);
  const auto i = static_cast<std::size_t>(it - first);
  const double w = (v - V[i - 1]) / (V[i] - V[i - 1]);
  return resolution * (static_cast<double>(i - 1) + w);
}

double SpikeShapeTemplate::falling_offset(double v) const {
  if (v >= V[peak]) return peak_offset();
  if (v <= V.back()) return duration();
  const auto first = V.begin() + static_cast<std::ptrdiff_t>(peak);
  const auto it = std::upper_bound(first, V.end(), v, std::greater<>());
  const auto j = static_cast<std::size_t>(it - V.begin());
  const double w = (V[j - 1] - v) / (V[j - 1] - V[j]);
  return resolution * (static_cast<double>(j - 1) + w);
}

double SpikeShapeTemplate::value_at(double offset) const {
  const double k = offset / resolution;
  if (k <= 0.0) return V.front();
  const auto last = V.size() - 1;
  if (k >= static_cast<double>(last)) return V.back();
  const auto i = static_cast<std::size_t>(std::floor(k));
  const double w = k - static_cast<double>(i);
  return V[i] + w * (V[i + 1] - V[i]);
}

SpikeShapeTemplate build_spike_template(const NeuronParams& params, double resolution,
                                        const TemplateOptions& options) {
  params.validate();
  if (!(resolution > 0.0) || resolution > 0.001 + 1e-15)
    throw ConfigError("template resolution must lie in (0, 0.001] ms");

  NeuronParams quiet = params;
  quiet.I_ext = 0.0;
  StateVector y = resting_state(quiet);

  const auto tableau = ButcherTableau<double>::fehlberg45();
  const auto rhs = [&](double t, const StateVector& s) {
    const double kick = t < options.probe_duration ? options.probe_current : 0.0;
    return hh_rhs(s, params, 0.0, kick);
  };

  const auto steps = static_cast<long>(std::llround(options.window / resolution));
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(steps) + 1);
  trace.push_back(y[kV]);
  for (long k = 0; k < steps; ++k) {
    y = rk_step(tableau, rhs, static_cast<double>(k) * resolution, y, resolution).y;
    clamp_gating(y);
    if (!y.allFinite()) throw SolverError("template construction failed: divergent probe run");
    trace.push_back(y[kV]);
  }

  const double low = params.V_spike - options.margin;
  std::size_t best_start = 0;
  std::size_t best_end = 0;
  bool found = false;
  bool inside = false;
  std::size_t start = 0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (!inside && trace[k] >= low) {
      inside = true;
      start = k;
    } else if (inside && trace[k] < low) {
      inside = false;
      best_start = start;
      best_end = k;
      found = true;
    }
  }
  if (!found) throw SolverError("template construction failed: no spike under probe stimulus");

  SpikeShapeTemplate shape;
  shape.resolution = resolution;
  shape.V_spike = params.V_spike;
  shape.margin = options.margin;
  shape.V.assign(trace.begin() + static_cast<std::ptrdiff_t>(best_start),
                 trace.begin() + static_cast<std::ptrdiff_t>(best_end) + 1);
  shape.peak = static_cast<std::size_t>(
      std::max_element(shape.V.begin(), shape.V.end()) - shape.V.begin());
  for (std::size_t k = 0; k < shape.peak; ++k)
    if (!(shape.V[k + 1] > shape.V[k]))
      throw SolverError("template construction failed: rising branch not monotone");
  for (std::size_t k = shape.peak; k + 1 < shape.V.size(); ++k)
    if (!(shape.V[k + 1] < shape.V[k]))
      throw SolverError("template construction failed: falling branch not monotone");
  return shape;
}

std::vector<double> template_extrapolate(const SpikeShapeTemplate& shape, double V0,
                                         double dVdt0, double horizon, double step) {
  if (V0 < shape.V_spike)
    throw ConfigError("spike-shape extrapolation requires V0 >= V_spike");
  if (!(step > 0.0) || horizon < 0.0) throw ConfigError("invalid extrapolation grid");
  const double v = std::min(V0, shape.peak_V());
  const double offset = dVdt0 >= 0.0 ? shape.rising_offset(v) : shape.falling_offset(v);
  const auto n = static_cast<std::size_t>(std::floor(horizon / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = shape.value_at(offset + static_cast<double>(k) * step);
  return out;
}

}  // namespace gapwfr
