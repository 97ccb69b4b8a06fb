#include "gapwfr/waveform.hpp"

#include "gapwfr/spike_template.hpp"

#include <vector>

namespace gapwfr {

std::string to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::hermite:
      return "hermite";
    case WaveformKind::constant:
      return "constant";
    case WaveformKind::spike_template:
      return "spike-template";
  }
  return "unknown";
}

Waveform initial_guess(double V, double dVdt, const SpikeShapeTemplate* shape, double t0,
                       double T) {
  if (shape == nullptr || V < shape->V_spike) return constant_waveform(V, t0, T);
  const std::vector<double> samples =
      template_extrapolate(*shape, V, dVdt, T, shape->resolution);
  return Waveform::sampled(t0, T, Eigen::Map<const Eigen::VectorXd>(samples.data(),
                                                                   static_cast<Eigen::Index>(samples.size())),
                           shape->resolution);
}

void write_waveform_csv(std::ostream& os, const Waveform& w, double h, int per_segment) {
  const int n = grid_steps(w.length(), h);
  os << "t,V,dVdt\n";
  const int total = n * per_segment;
  for (int k = 0; k <= total; ++k) {
    const double t = w.t0() + w.length() * static_cast<double>(k) / total;
    os << t << ',' << w(t) << ',' << w.derivative(t) << '\n';
  }
}

}  // namespace gapwfr
