#ifndef GAPWFR_NETWORK_HPP
#define GAPWFR_NETWORK_HPP

#include "gapwfr/model.hpp"
#include "gapwfr/relaxation.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace gapwfr {

struct GapJunction {
  std::size_t a;
  std::size_t b;
  double g;  // nS
};

struct SpikeConnection {
  std::size_t source;
  std::size_t target;
  double weight;  // pA jump of the target's synaptic current
  double delay;   // ms, positive multiple of h
};

struct NeuronSpec {
  NeuronParams params;
  std::optional<StateVector> initial;  // resting state when empty
};

struct Network {
  std::vector<NeuronSpec> neurons;
  std::vector<GapJunction> gaps;
  std::vector<SpikeConnection> connections;

  std::size_t add_neuron(const NeuronParams& params);
  void add_gap(std::size_t a, std::size_t b, double g);
  void connect(std::size_t source, std::size_t target, double weight, double delay);
  std::size_t size() const { return neurons.size(); }

  /// Checks endpoint ranges, conductances and that delays are multiples of h.
  void validate(double h) const;
  GapGraph gap_graph() const;
};

struct SimulationConfig {
  double h = 0.1;           // ms
  double duration = 100.0;  // ms
  std::vector<std::size_t> record;  // neuron ids; empty records all
  WfrConfig wfr;
  unsigned workers = 1;
  SolverSettings solver;
  double template_resolution = 0.001;  // ms
};

/// Ring of per-slot spike event lists. Slot k holds the events due at grid time k*h.
class SpikeBuffer {
 public:
  struct Event {
    std::size_t target;
    double weight;
  };

  explicit SpikeBuffer(std::size_t depth);

  /// Queue a spike emitted at `emission_slot` for delivery `delay_slots` later.
  void schedule(long emission_slot, long delay_slots, std::size_t target, double weight);
  /// Remove and return the events due at `slot`; slots must be taken in order.
  std::vector<Event> take(long slot);
  std::size_t depth() const { return ring_.size(); }
  long next_slot() const { return head_; }

 private:
  std::vector<std::vector<Event>> ring_;
  long head_ = 0;
};

struct Recording {
  double h = 0.0;
  std::vector<std::size_t> neurons;
  std::vector<std::vector<double>> V;       // per recorded neuron, every grid point
  std::vector<std::vector<double>> spikes;  // registered spike times (ms)

  std::size_t samples() const { return V.empty() ? 0 : V.front().size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * h; }
};

struct SimulationResult {
  Recording recording;
  IterationStats stats;
};

/// Smallest spike delay; the configured iteration interval for gap-only networks.
double min_delay(const Network& network, double configured_T);

/// Runs the network over config.duration in windows of the minimal delay.
SimulationResult simulate(const Network& network, const SimulationConfig& config);

/// Ring lattice of v identical neurons, each gap-coupled to its `degree` nearest
/// neighbours with g = total_g / degree (odd degree adds the opposite neuron).
Network build_scaled_network(std::size_t v, std::size_t degree, double total_g,
                             const NeuronParams& params);

}  // namespace gapwfr

#endif  // GAPWFR_NETWORK_HPP
