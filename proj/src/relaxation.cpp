#include "gapwfr/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gapwfr {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::jacobi:
      return "jacobi";
    case Scheme::gauss_seidel:
      return "gauss_seidel";
    case Scheme::picard:
      return "picard";
    case Scheme::non_iterative:
      return "non_iterative";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "jacobi" || name == "wfr") return Scheme::jacobi;
  if (name == "gauss_seidel") return Scheme::gauss_seidel;
  if (name == "picard") return Scheme::picard;
  if (name == "non_iterative") return Scheme::non_iterative;
  throw ConfigError("unknown scheme '" + name + "'");
}

void WfrConfig::validate(double h) const {
  if (!(wfr_tol > 0.0)) throw ConfigError("wfr_tol must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (scheme != Scheme::non_iterative) grid_steps(T, h);
}

void IterationStats::record(int iters, bool ok, double seconds) {
  iterations.push_back(iters);
  converged.push_back(ok ? 1 : 0);
  wall_s.push_back(seconds);
}

long IterationStats::rounds() const {
  return std::accumulate(iterations.begin(), iterations.end(), 0L);
}

double IterationStats::mean_iterations() const {
  if (iterations.empty()) return 0.0;
  return static_cast<double>(rounds()) / static_cast<double>(iterations.size());
}

double IterationStats::converged_fraction() const {
  if (converged.empty()) return 1.0;
  const auto ok = std::count(converged.begin(), converged.end(), 1);
  return static_cast<double>(ok) / static_cast<double>(converged.size());
}

double IterationStats::total_wall_s() const {
  return std::accumulate(wall_s.begin(), wall_s.end(), 0.0);
}

void IterationStats::append(const IterationStats& other) {
  iterations.insert(iterations.end(), other.iterations.begin(), other.iterations.end());
  converged.insert(converged.end(), other.converged.begin(), other.converged.end());
  wall_s.insert(wall_s.end(), other.wall_s.begin(), other.wall_s.end());
}

void IterationStats::write_csv(std::ostream& os) const {
  os << "interval,iterations,converged,wall_s\n";
  for (std::size_t k = 0; k < iterations.size(); ++k)
    os << k << ',' << iterations[k] << ',' << static_cast<int>(converged[k]) << ',' << wall_s[k]
       << '\n';
}

void GapGraph::connect(std::size_t a, std::size_t b, double g) {
  if (a >= size() || b >= size()) throw ConfigError("gap junction endpoint out of range");
  if (a == b) throw ConfigError("gap junction endpoints must be distinct");
  if (!(g >= 0.0)) throw ConfigError("gap conductance must be non-negative");
  adjacency_[a].push_back({b, g});
  adjacency_[b].push_back({a, g});
  total_[a] += g;
  total_[b] += g;
}

CouplingInput::CouplingInput(std::span<const GapEdge> edges, std::span<const Waveform> waveforms,
                             double t0, int steps, double h)
    : empty_(edges.empty()), t0_(t0), h_(h), steps_(steps) {
  const double eps = 1e-9 * std::max(1.0, h * steps);
  auto ensure_nodes = [&] {
    if (!has_nodes_) {
      nodes_ = Waveform::Nodes::Zero(steps + 1, 2);
      has_nodes_ = true;
    }
  };
  for (const auto& e : edges) {
    if (e.neighbor >= waveforms.size()) throw ConfigError("missing neighbour waveform");
    const Waveform& w = waveforms[e.neighbor];
    if (std::abs(w.t0() - t0) > eps || std::abs(w.length() - h * steps) > eps)
      throw ConfigError("neighbour waveform does not cover the iteration interval");
    total_g_ += e.g;
    switch (w.kind()) {
      case WaveformKind::hermite:
        if (w.segments() != steps) throw ConfigError("neighbour waveform on a different grid");
        ensure_nodes();
        nodes_ += e.g * w.nodes();
        break;
      case WaveformKind::constant:
        ensure_nodes();
        nodes_.col(0).array() += e.g * w(t0);
        break;
      case WaveformKind::spike_template:
        sampled_.emplace_back(e.g, &w);
        break;
    }
  }
}

double CouplingInput::weighted_sum(double t) const {
  double s = 0.0;
  if (has_nodes_) {
    const double x = (t - t0_) / h_;
    const int u = std::clamp(static_cast<int>(std::floor(x)), 0, steps_ - 1);
    const auto p = hermite_basis(x - u);
    s = nodes_(u, 0) * p[0] + nodes_(u + 1, 0) * p[1] +
        h_ * (nodes_(u, 1) * p[2] + nodes_(u + 1, 1) * p[3]);
  }
  for (const auto& [g, w] : sampled_) s += g * (*w)(t);
  return s;
}

bool converged(std::span<const Waveform> curr, std::span<const Waveform> prev, double wfr_tol,
               double h) {
  if (curr.size() != prev.size()) throw ConfigError("iteration snapshots differ in size");
  for (std::size_t i = 0; i < curr.size(); ++i)
    if (waveform_max_diff(curr[i], prev[i], h) > wfr_tol) return false;
  return true;
}

}  // namespace gapwfr
