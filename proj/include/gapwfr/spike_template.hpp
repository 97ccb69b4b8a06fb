#ifndef GAPWFR_SPIKE_TEMPLATE_HPP
#define GAPWFR_SPIKE_TEMPLATE_HPP

#include "gapwfr/model.hpp"

#include <cstddef>
#include <vector>

namespace gapwfr {

/// One canonical action potential sampled at a fine fixed resolution, starting
/// where V first reaches V_spike - margin and ending where it falls back below it.
/// The rising branch is samples [0, peak], the falling branch [peak, end].
struct SpikeShapeTemplate {
  double resolution = 0.0;  // ms between samples
  double V_spike = 0.0;
  double margin = 0.0;
  std::vector<double> V;
  std::size_t peak = 0;

  double start_V() const { return V.front(); }
  double peak_V() const { return V[peak]; }
  double end_V() const { return V.back(); }
  double duration() const { return resolution * static_cast<double>(V.size() - 1); }
  double peak_offset() const { return resolution * static_cast<double>(peak); }

  /// Time offset of V on the strictly increasing branch (clamped to its range).
  double rising_offset(double v) const;
  /// Time offset of V on the strictly decreasing branch (clamped to its range).
  double falling_offset(double v) const;
  /// Template value at a time offset; constant beyond either end.
  double value_at(double offset) const;
};

struct TemplateOptions {
  double margin = 2.0;           // mV below V_spike on both ends
  double probe_current = 2000.0; // pA added on top of I_ext during the kick
  double probe_duration = 0.5;   // ms
  double window = 100.0;         // ms simulated while searching for spikes
};

/// Simulates one uncoupled neuron from rest with a suprathreshold kick and takes
/// the last complete suprathreshold excursion. Deterministic.
SpikeShapeTemplate build_spike_template(const NeuronParams& params, double resolution,
                                        const TemplateOptions& options = {});

/// Samples (at 0, step, 2*step, ... <= horizon) of the template continued from
/// V0 on the rising branch when dVdt0 >= 0, else on the falling branch. V0 above
/// the peak is clamped to the peak. Requires V0 >= V_spike.
std::vector<double> template_extrapolate(const SpikeShapeTemplate& shape, double V0,
                                         double dVdt0, double horizon, double step);

}  // namespace gapwfr

#endif  // GAPWFR_SPIKE_TEMPLATE_HPP
