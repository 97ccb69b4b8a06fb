#include "gapwfr/network.hpp"

#include "gapwfr/spike_template.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

namespace gapwfr {
namespace {

long delay_slots(double delay, double h) {
  const double r = delay / h;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ConfigError("spike delays must be positive multiples of h");
  return static_cast<long>(n);
}

}  // namespace

std::size_t Network::add_neuron(const NeuronParams& params) {
  neurons.push_back({params, std::nullopt});
  return neurons.size() - 1;
}

void Network::add_gap(std::size_t a, std::size_t b, double g) { gaps.push_back({a, b, g}); }

void Network::connect(std::size_t source, std::size_t target, double weight, double delay) {
  connections.push_back({source, target, weight, delay});
}

void Network::validate(double h) const {
  for (const auto& n : neurons) n.params.validate();
  for (const auto& g : gaps) {
    if (g.a >= size() || g.b >= size()) throw ConfigError("gap junction endpoint out of range");
    if (g.a == g.b) throw ConfigError("gap junction endpoints must be distinct");
    if (!(g.g >= 0.0)) throw ConfigError("gap conductance must be non-negative");
  }
  for (const auto& c : connections) {
    if (c.source >= size() || c.target >= size())
      throw ConfigError("spike connection endpoint out of range");
    delay_slots(c.delay, h);
  }
}

GapGraph Network::gap_graph() const {
  GapGraph graph(size());
  for (const auto& g : gaps) graph.connect(g.a, g.b, g.g);
  return graph;
}

SpikeBuffer::SpikeBuffer(std::size_t depth) : ring_(std::max<std::size_t>(depth, 1)) {}

void SpikeBuffer::schedule(long emission_slot, long delay, std::size_t target, double weight) {
  if (delay < 1) throw ConfigError("spike delay must be at least one slot");
  const long slot = emission_slot + delay;
  if (slot < head_) throw ConfigError("spike would arrive before the current slot");
  if (slot >= head_ + static_cast<long>(ring_.size()))
    throw ConfigError("spike delay exceeds buffer depth");
  ring_[static_cast<std::size_t>(slot) % ring_.size()].push_back({target, weight});
}

std::vector<SpikeBuffer::Event> SpikeBuffer::take(long slot) {
  if (slot != head_) throw ConfigError("spike slots must be taken in order");
  auto& cell = ring_[static_cast<std::size_t>(slot) % ring_.size()];
  std::vector<Event> due;
  due.swap(cell);
  ++head_;
  return due;
}

double min_delay(const Network& network, double configured_T) {
  if (network.connections.empty()) return configured_T;
  double d = network.connections.front().delay;
  for (const auto& c : network.connections) d = std::min(d, c.delay);
  return d;
}

SimulationResult simulate(const Network& network, const SimulationConfig& cfg) {
  const double h = cfg.h;
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  network.validate(h);
  cfg.wfr.validate(h);
  if (cfg.duration < 0.0) throw ConfigError("duration must be non-negative");
  const long total_steps = cfg.duration == 0.0 ? 0 : grid_steps(cfg.duration, h);
  const bool non_iterative = cfg.wfr.scheme == Scheme::non_iterative;
  const int interval_steps = non_iterative ? 1 : grid_steps(cfg.wfr.T, h);

  long window_steps = interval_steps;
  long max_delay = 0;
  if (!network.connections.empty()) {
    window_steps = grid_steps(min_delay(network, cfg.wfr.T), h);
    if (window_steps % interval_steps != 0)
      throw ConfigError("the iteration interval must divide the minimal delay");
    for (const auto& c : network.connections) max_delay = std::max(max_delay, delay_slots(c.delay, h));
  }

  const std::size_t n = network.size();
  std::vector<HhCell> cells;
  cells.reserve(n);
  std::vector<StateVector> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = network.neurons[i];
    cells.push_back({spec.params});
    if (spec.initial) {
      states[i] = *spec.initial;
    } else {
      NeuronParams quiet = spec.params;
      quiet.I_ext = 0.0;
      states[i] = resting_state(quiet);
    }
  }
  const GapGraph graph = network.gap_graph();
  std::vector<double> hints(n, h);

  // spike-shape templates, one per distinct parameter set
  std::vector<std::pair<NeuronParams, std::shared_ptr<const SpikeShapeTemplate>>> cache;
  std::vector<const SpikeShapeTemplate*> shapes(n, nullptr);
  if (cfg.wfr.spike_detection) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = network.neurons[i].params;
      auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == p; });
      if (it == cache.end()) {
        cache.emplace_back(p, std::make_shared<const SpikeShapeTemplate>(
                                  build_spike_template(p, cfg.template_resolution)));
        it = cache.end() - 1;
      }
      shapes[i] = it->second.get();
    }
  }

  std::vector<std::vector<std::size_t>> outgoing(n);
  for (std::size_t k = 0; k < network.connections.size(); ++k)
    outgoing[network.connections[k].source].push_back(k);
  SpikeBuffer buffer(static_cast<std::size_t>(max_delay + interval_steps + 1));

  SimulationResult result;
  Recording& rec = result.recording;
  rec.h = h;
  if (cfg.record.empty()) {
    rec.neurons.resize(n);
    for (std::size_t i = 0; i < n; ++i) rec.neurons[i] = i;
  } else {
    rec.neurons = cfg.record;
    for (auto id : rec.neurons)
      if (id >= n) throw ConfigError("recorded neuron id out of range");
  }
  rec.V.resize(rec.neurons.size());
  rec.spikes.resize(rec.neurons.size());
  std::vector<long> record_slot(n, -1);
  for (std::size_t r = 0; r < rec.neurons.size(); ++r) {
    record_slot[rec.neurons[r]] = static_cast<long>(r);
    rec.V[r].reserve(static_cast<std::size_t>(total_steps) + 1);
    rec.V[r].push_back(states[rec.neurons[r]][kV]);
  }

  SolverSettings solver = cfg.solver;
  solver.controller.max_step = std::min(solver.controller.max_step, h);
  solver.controller.dt = std::min(solver.controller.dt, solver.controller.max_step);
  WorkerPool pool(cfg.workers);
  std::vector<Waveform> guesses(n);
  std::vector<double> weights;

  for (long w0 = 0; w0 < total_steps; w0 += window_steps) {
    const long w_end = std::min(w0 + window_steps, total_steps);
    for (long s0 = w0; s0 < w_end; s0 += interval_steps) {
      const int steps = static_cast<int>(std::min<long>(interval_steps, w_end - s0));
      const double t0 = static_cast<double>(s0) * h;
      const double T = steps * h;

      pool.parallel_for(n, [&](std::size_t i) {
        const double V = states[i][kV];
        double gap = 0.0;
        for (const auto& e : graph.neighbors(i)) gap += gap_current(e.g, V, states[e.neighbor][kV]);
        const double dVdt = hh_rhs(states[i], cells[i].params, gap, 0.0)[kV];
        guesses[i] = initial_guess(V, dVdt, shapes[i], t0, T);
      });

      weights.clear();
      for (int u = 0; u < steps; ++u) {
        for (const auto& ev : buffer.take(s0 + u)) {
          if (weights.empty()) weights.assign(n * static_cast<std::size_t>(steps), 0.0);
          weights[ev.target * static_cast<std::size_t>(steps) + static_cast<std::size_t>(u)] +=
              ev.weight;
        }
      }

      IntervalProblem<HhCell> problem;
      problem.cells = cells;
      problem.graph = &graph;
      problem.states = states;
      problem.step_hints = hints;
      problem.guesses = guesses;
      problem.spike_weights = weights;
      problem.t0 = t0;
      problem.steps = steps;
      problem.h = h;

      const auto start = std::chrono::steady_clock::now();
      auto outcome = non_iterative ? non_iterative_interval(problem, solver, pool)
                                   : run_interval(problem, cfg.wfr, solver, pool);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.stats.record(outcome.iterations, outcome.converged, wall);

      for (std::size_t i = 0; i < n; ++i) {
        const auto& sol = outcome.solutions[i];
        states[i] = sol.grid.values.col(steps);
        hints[i] = sol.next_dt;
        const long r = record_slot[i];
        for (int u = 1; u <= steps; ++u) {
          const double v_prev = sol.grid.values(kV, u - 1);
          const double v_curr = sol.grid.values(kV, u);
          if (r >= 0) rec.V[static_cast<std::size_t>(r)].push_back(v_curr);
          if (!detect_threshold_crossing(v_prev, v_curr, cells[i].params.theta)) continue;
          const long slot = s0 + u;
          if (r >= 0) rec.spikes[static_cast<std::size_t>(r)].push_back(static_cast<double>(slot) * h);
          for (auto k : outgoing[i]) {
            const auto& c = network.connections[k];
            buffer.schedule(slot, delay_slots(c.delay, h), c.target, c.weight);
          }
        }
      }
    }
  }
  return result;
}

Network build_scaled_network(std::size_t v, std::size_t degree, double total_g,
                             const NeuronParams& params) {
  if (degree == 0) throw ConfigError("degree must be positive");
  if (v <= degree) throw ConfigError("network size must exceed the degree");
  if (degree % 2 == 1 && v % 2 == 1)
    throw ConfigError("odd degree requires an even number of neurons");
  Network net;
  for (std::size_t i = 0; i < v; ++i) net.add_neuron(params);
  const double g = total_g / static_cast<double>(degree);
  const std::size_t half = degree / 2;
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t k = 1; k <= half; ++k) net.add_gap(i, (i + k) % v, g);
  if (degree % 2 == 1)
    for (std::size_t i = 0; i < v / 2; ++i) net.add_gap(i, i + v / 2, g);
  return net;
}

}  // namespace gapwfr
