#ifndef GAPWFR_RELAXATION_HPP
#define GAPWFR_RELAXATION_HPP

// Waveform relaxation over gap-junction coupled subsystems. Each subsystem is
// one cell; only its membrane potential (state component 0) is exchanged, as a
// cubic Hermite waveform on the h-grid.

#include "gapwfr/model.hpp"
#include "gapwfr/rk.hpp"
#include "gapwfr/waveform.hpp"
#include "gapwfr/worker_pool.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gapwfr {

enum class Scheme { jacobi, gauss_seidel, picard, non_iterative };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct WfrConfig {
  double T = 1.0;         // iteration interval (ms)
  double wfr_tol = 1e-4;  // mV
  int max_iterations = 15;
  Scheme scheme = Scheme::jacobi;
  bool spike_detection = true;

  void validate(double h) const;
};

struct SolverSettings {
  ButcherTableau<double> tableau = ButcherTableau<double>::fehlberg45();
  StepController<double> controller{};
};

/// Iteration counts and timings, one entry per iteration interval.
struct IterationStats {
  std::vector<int> iterations;
  std::vector<char> converged;
  std::vector<double> wall_s;

  void record(int iters, bool ok, double seconds);
  std::size_t intervals() const { return iterations.size(); }
  long rounds() const;  // one communication round per sweep
  double mean_iterations() const;
  double converged_fraction() const;
  double total_wall_s() const;
  void append(const IterationStats& other);
  void write_csv(std::ostream& os) const;
};

struct GapEdge {
  std::size_t neighbor;
  double g;  // nS
};

/// Undirected gap-junction adjacency.
class GapGraph {
 public:
  explicit GapGraph(std::size_t cells = 0) : adjacency_(cells), total_(cells, 0.0) {}

  void connect(std::size_t a, std::size_t b, double g);
  std::size_t size() const { return adjacency_.size(); }
  std::span<const GapEdge> neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  double total_conductance(std::size_t i) const { return total_[i]; }

 private:
  std::vector<std::vector<GapEdge>> adjacency_;
  std::vector<double> total_;
};

/// Aggregated gap input of one cell over an interval:
/// sum_j g_ij * w_j(t) - (sum_j g_ij) * V. Hermite and constant neighbour
/// waveforms are folded into one set of Hermite nodes; sampled (spike-shape)
/// neighbours are evaluated individually.
class CouplingInput {
 public:
  CouplingInput() = default;
  CouplingInput(std::span<const GapEdge> edges, std::span<const Waveform> waveforms, double t0,
                int steps, double h);

  double weighted_sum(double t) const;
  double operator()(double t, double V_self) const {
    if (empty_) return 0.0;
    return weighted_sum(t) - total_g_ * V_self;
  }
  double total_conductance() const { return total_g_; }

 private:
  bool empty_ = true;
  bool has_nodes_ = false;
  double t0_ = 0.0;
  double h_ = 0.0;
  int steps_ = 0;
  double total_g_ = 0.0;
  Waveform::Nodes nodes_;
  std::vector<std::pair<double, const Waveform*>> sampled_;
};

template <class Cell>
struct SubsystemSolution {
  GridSolution<double, Cell::kDim> grid;
  Waveform waveform;
  double next_dt = 0.0;
};

/// Integrates one cell over [t0, t0 + steps*h] against the given coupling input.
/// Spike weights (one per h-step, may be empty) jump the cell state at the left
/// grid point of each step.
template <class Cell>
SubsystemSolution<Cell> solve_subsystem(const Cell& cell, const typename Cell::State& y_start,
                                        double dt_start, const CouplingInput& input,
                                        std::span<const double> spike_weights, double t0,
                                        int steps, double h, const SolverSettings& solver) {
  using State = typename Cell::State;
  if (!spike_weights.empty() && static_cast<int>(spike_weights.size()) != steps)
    throw ConfigError("spike weights must cover every h-step of the interval");
  const auto rhs = [&](double t, const State& y) {
    return cell.rhs(y, input(t, Cell::potential(y)));
  };
  IntervalHooks<double, Cell::kDim> hooks;
  hooks.project = [&](State& y) { cell.project(y); };
  if (!spike_weights.empty()) {
    hooks.at_grid = [&](int u, State& y) {
      const double w = spike_weights[static_cast<std::size_t>(u)];
      if (w != 0.0) cell.receive_spike(y, w);
    };
  }
  StepController<double> ctrl = solver.controller;
  if (dt_start > 0.0) ctrl.dt = dt_start;
  SubsystemSolution<Cell> out;
  out.grid = integrate_grid(solver.tableau, ctrl, rhs, y_start, t0, steps, h, hooks);
  out.waveform = hermite_waveform(t0, h, out.grid.values.row(0), out.grid.derivatives.row(0));
  out.next_dt = ctrl.dt;
  return out;
}

/// Convenience overload building the coupling input from neighbour waveforms.
template <class Cell>
SubsystemSolution<Cell> solve_subsystem(const Cell& cell, const typename Cell::State& y_start,
                                        std::span<const GapEdge> edges,
                                        std::span<const Waveform> waveforms, double t0, int steps,
                                        double h, const SolverSettings& solver) {
  const CouplingInput input(edges, waveforms, t0, steps, h);
  return solve_subsystem(cell, y_start, solver.controller.dt, input, {}, t0, steps, h, solver);
}

/// True iff every waveform of iteration m is within wfr_tol of iteration m-1
/// at all grid points u = 1..T/h.
bool converged(std::span<const Waveform> curr, std::span<const Waveform> prev, double wfr_tol,
               double h);

template <class Cell>
struct IntervalProblem {
  std::span<const Cell> cells;
  const GapGraph* graph = nullptr;
  std::span<const typename Cell::State> states;
  std::span<const double> step_hints;     // per cell; empty uses the controller default
  std::span<const Waveform> guesses;      // iteration 0
  std::span<const double> spike_weights;  // cells x steps, row-major; may be empty
  double t0 = 0.0;
  int steps = 1;
  double h = 0.1;
};

template <class Cell>
struct IntervalOutcome {
  std::vector<SubsystemSolution<Cell>> solutions;
  int iterations = 0;
  bool converged = false;
  std::vector<double> max_diff;  // per iteration, over coupled cells

  std::vector<Waveform> waveforms() const {
    std::vector<Waveform> w;
    w.reserve(solutions.size());
    for (const auto& s : solutions) w.push_back(s.waveform);
    return w;
  }
};

using IterationObserver = std::function<void(int, std::span<const Waveform>)>;

namespace detail {

template <class Cell>
void solve_cell(const IntervalProblem<Cell>& p, std::size_t i, std::span<const Waveform> inputs,
                const SolverSettings& solver, SubsystemSolution<Cell>& out) {
  const CouplingInput input(p.graph->neighbors(i), inputs, p.t0, p.steps, p.h);
  const double dt = p.step_hints.empty() ? solver.controller.dt : p.step_hints[i];
  std::span<const double> weights;
  if (!p.spike_weights.empty())
    weights = p.spike_weights.subspan(i * static_cast<std::size_t>(p.steps),
                                      static_cast<std::size_t>(p.steps));
  try {
    out = solve_subsystem(p.cells[i], p.states[i], dt, input, weights, p.t0, p.steps, p.h,
                          solver);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " (cell " + std::to_string(i) + ", t0 = " +
                      std::to_string(p.t0) + " ms)");
  }
}

template <class Cell>
void check_problem(const IntervalProblem<Cell>& p) {
  const std::size_t n = p.cells.size();
  if (p.graph == nullptr || p.graph->size() != n || p.states.size() != n ||
      p.guesses.size() != n || (!p.step_hints.empty() && p.step_hints.size() != n))
    throw ConfigError("interval problem dimensions disagree");
  if (!p.spike_weights.empty() && p.spike_weights.size() != n * static_cast<std::size_t>(p.steps))
    throw ConfigError("spike weights must be cells x steps");
}

}  // namespace detail

/// Iterates all subsystems over one interval until the grid values of two
/// successive iterations agree within wfr_tol or max_iterations is reached.
/// Jacobi sweeps run on the worker pool and are bit-identical for any worker count.
template <class Cell>
IntervalOutcome<Cell> run_interval(const IntervalProblem<Cell>& p, const WfrConfig& cfg,
                                   const SolverSettings& solver, WorkerPool& pool,
                                   const IterationObserver& observer = {}) {
  detail::check_problem(p);
  if (cfg.scheme == Scheme::picard)
    throw ConfigError("picard splitting needs full-state waveforms; use picard_iterate");
  const std::size_t n = p.cells.size();
  const bool single_sweep = cfg.scheme == Scheme::non_iterative;
  const int max_iterations = single_sweep ? 1 : cfg.max_iterations;

  std::vector<char> coupled(n);
  bool any_coupled = false;
  for (std::size_t i = 0; i < n; ++i) {
    coupled[i] = p.graph->degree(i) > 0;
    any_coupled = any_coupled || coupled[i];
  }

  IntervalOutcome<Cell> out;
  out.solutions.resize(n);
  std::vector<Waveform> prev(p.guesses.begin(), p.guesses.end());
  std::vector<Waveform> curr(n);
  std::vector<double> diff(n, 0.0);

  for (int m = 1; m <= max_iterations; ++m) {
    if (cfg.scheme == Scheme::gauss_seidel) {
      // ascending cell order; cells j < i already hold iteration m
      curr = prev;
      for (std::size_t i = 0; i < n; ++i) {
        if (m > 1 && !coupled[i]) continue;
        detail::solve_cell(p, i, curr, solver, out.solutions[i]);
        curr[i] = out.solutions[i].waveform;
      }
      for (std::size_t i = 0; i < n; ++i)
        diff[i] = coupled[i] ? waveform_max_diff(curr[i], prev[i], p.h) : 0.0;
    } else {
      pool.parallel_for(n, [&](std::size_t i) {
        if (m > 1 && !coupled[i]) {
          curr[i] = prev[i];
          diff[i] = 0.0;
          return;
        }
        detail::solve_cell(p, i, prev, solver, out.solutions[i]);
        curr[i] = out.solutions[i].waveform;
        diff[i] = coupled[i] ? waveform_max_diff(curr[i], prev[i], p.h) : 0.0;
      });
    }
    double worst = 0.0;
    for (double d : diff) worst = std::max(worst, d);
    out.max_diff.push_back(worst);
    out.iterations = m;
    if (observer) observer(m, curr);
    if (single_sweep || !any_coupled || worst <= cfg.wfr_tol) {
      out.converged = true;
      break;
    }
    prev.swap(curr);
  }
  return out;
}

/// One sweep over a single h-step against frozen extrapolations of the neighbours.
template <class Cell>
IntervalOutcome<Cell> non_iterative_interval(const IntervalProblem<Cell>& p,
                                             const SolverSettings& solver, WorkerPool& pool) {
  if (p.steps != 1) throw ConfigError("the non-iterative scheme advances one h-step at a time");
  WfrConfig cfg;
  cfg.T = p.h;
  cfg.scheme = Scheme::non_iterative;
  return run_interval(p, cfg, solver, pool);
}

}  // namespace gapwfr

#endif  // GAPWFR_RELAXATION_HPP
