#include "gapwfr/bench.hpp"

#include "gapwfr/recording_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gapwfr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string format_h(double h) {
  std::ostringstream os;
  os << h;
  return os.str();
}

std::string trace_id(const MethodSpec& m, double h, unsigned workers) {
  std::string id = m.label + "_h" + format_h(h);
  if (workers != 1) id += "_w" + std::to_string(workers);
  for (char& c : id)
    if (c == '@') c = '_';
  return id;
}

double interval_length(const ExperimentSpec& spec, const Network& net, const MethodSpec& m,
                       double h) {
  if (m.scheme == Scheme::non_iterative || !m.window_interval) return h;
  return min_delay(net, spec.network.window);
}

}  // namespace

std::string to_string(Experiment kind) {
  switch (kind) {
    case Experiment::accuracy:
      return "accuracy";
    case Experiment::efficiency:
      return "efficiency";
    case Experiment::shift:
      return "shift";
    case Experiment::iterations:
      return "iterations";
    case Experiment::scaling:
      return "scaling";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (auto k : {Experiment::accuracy, Experiment::efficiency, Experiment::shift,
                 Experiment::iterations, Experiment::scaling})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment '" + name + "'");
}

MethodSpec MethodSpec::parse(const std::string& token) {
  MethodSpec m;
  m.label = token;
  const auto at = token.find('@');
  const std::string base = token.substr(0, at);
  if (base == "ni") {
    m.scheme = Scheme::non_iterative;
    m.spike_detection = false;
  } else if (base == "ni_sd") {
    m.scheme = Scheme::non_iterative;
  } else if (base == "wfr") {
    m.scheme = Scheme::jacobi;
  } else if (base == "wfr_h") {
    m.scheme = Scheme::jacobi;
    m.window_interval = false;
  } else if (base == "gs") {
    m.scheme = Scheme::gauss_seidel;
  } else if (base == "gs_h") {
    m.scheme = Scheme::gauss_seidel;
    m.window_interval = false;
  } else {
    throw ConfigError("unknown method '" + token + "'");
  }
  if (at != std::string::npos) {
    const std::string tol = token.substr(at + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tol, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tol.size() || !(v > 0.0)) throw ConfigError("bad tolerance in method '" + token + "'");
    m.tolerance = v;
  }
  return m;
}

Network NetworkSpec::build() const {
  if (!is_explicit()) return build_scaled_network(neurons, degree, total_g, params);
  Network net;
  for (std::size_t i = 0; i < neurons; ++i) net.add_neuron(params);
  for (const auto& g : gaps) net.add_gap(g.a, g.b, g.g);
  for (const auto& c : connections) net.connect(c.source, c.target, c.weight, c.delay);
  return net;
}

ExperimentSpec ExperimentSpec::defaults(Experiment kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.h_values = {0.1, 0.05, 0.02, 0.01};
  auto methods = [&](std::initializer_list<const char*> tokens) {
    s.methods.clear();
    for (const char* t : tokens) s.methods.push_back(MethodSpec::parse(t));
  };
  s.out_dir = "out/" + to_string(kind);
  switch (kind) {
    case Experiment::accuracy:
      methods({"ni", "ni_sd", "wfr", "wfr@1e-10"});
      break;
    case Experiment::efficiency:
      methods({"ni", "ni_sd", "wfr", "wfr@1e-10"});
      s.repetitions = 3;
      break;
    case Experiment::shift:
      s.h_values = {0.1};
      methods({"ni", "ni_sd", "wfr"});
      s.traces = true;
      break;
    case Experiment::iterations:
      methods({"wfr_h", "wfr"});
      s.wfr_tol = 1e-4;
      break;
    case Experiment::scaling:
      s.h_values = {0.1};
      methods({"wfr"});
      s.wfr_tol = 1e-4;
      s.duration = 50.0;
      s.network.neurons = 1000;
      s.network.degree = 60;
      s.workers = {1, 2, 4, 8};
      s.repetitions = 3;
      break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (h_values.empty()) throw ConfigError("the step-size sweep is empty");
  for (double h : h_values)
    if (!(h > 0.0)) throw ConfigError("step sizes must be positive");
  if (methods.empty()) throw ConfigError("no methods configured");
  if (!(wfr_tol > 0.0) || !(rk_tol > 0.0) || !(reference_tolerance > 0.0))
    throw ConfigError("tolerances must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  if (workers.empty()) throw ConfigError("no worker counts configured");
  for (unsigned w : workers)
    if (w == 0) throw ConfigError("worker counts must be positive");
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  if (!(network.window > 0.0)) throw ConfigError("network window must be positive");
  ButcherTableau<double>::by_name(tableau);
  network.params.validate();
}

PayoffRow payoff(const ReportRow& T_old, const ReportRow& T_new) {
  PayoffRow p;
  p.h = T_old.h;
  p.T_old = T_old.T;
  p.T_new = T_new.T;
  p.iota_old = T_old.mean_iters;
  p.iota_new = T_new.mean_iters;
  p.rounds_old = T_old.rounds;
  p.rounds_new = T_new.rounds;
  p.T_ratio = T_new.T / T_old.T;
  p.iota_ratio = T_new.mean_iters / T_old.mean_iters;
  p.predicted_new_wins = p.T_ratio > p.iota_ratio;
  p.observed_new_wins = T_new.rounds < T_old.rounds;
  return p;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "scheme",  "h",      "T",       "wfr_tol",      "error",    "wall_s",
      "mean_iters", "rounds", "converged_fraction", "method", "spike_detection", "rk_tol",
      "neurons", "workers", "rounds_per_s", "shift_ms", "status"};
  return cols;
}

void ErrorReport::write_csv(std::ostream& os) const {
  const auto& cols = report_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n' << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.scheme << ',' << r.h << ',' << r.T << ',' << r.wfr_tol << ',' << r.error << ','
       << r.wall_s << ',' << r.mean_iters << ',' << r.rounds << ',' << r.converged_fraction << ','
       << csv_safe(r.method) << ',' << (r.spike_detection ? 1 : 0) << ',' << r.rk_tol << ','
       << r.neurons << ',' << r.workers << ',' << r.rounds_per_s << ',' << r.shift_ms << ','
       << csv_safe(r.status) << '\n';
  }
}

void ErrorReport::write_payoff_csv(std::ostream& os) const {
  os << "h,T_old,T_new,iota_old,iota_new,rounds_old,rounds_new,T_ratio,iota_ratio,"
        "predicted_new_wins,observed_new_wins,agree\n"
     << std::setprecision(12);
  for (const auto& p : payoffs)
    os << p.h << ',' << p.T_old << ',' << p.T_new << ',' << p.iota_old << ',' << p.iota_new << ','
       << p.rounds_old << ',' << p.rounds_new << ',' << p.T_ratio << ',' << p.iota_ratio << ','
       << p.predicted_new_wins << ',' << p.observed_new_wins << ',' << p.agrees() << '\n';
}

Recording reference_run(const NeuronParams& params, double duration, double h, double tolerance,
                        const std::string& tableau) {
  Network one;
  one.add_neuron(params);
  SimulationConfig cfg;
  cfg.h = h;
  cfg.duration = duration;
  cfg.wfr.scheme = Scheme::jacobi;
  cfg.wfr.spike_detection = false;
  cfg.wfr.T = duration > 0.0 ? duration : h;
  cfg.solver.tableau = ButcherTableau<double>::by_name(tableau);
  cfg.solver.controller.tolerance = tolerance;
  return simulate(one, cfg).recording;
}

double max_error(const Recording& recording, const Recording& reference) {
  if (std::abs(recording.h - reference.h) > 1e-12 * std::max(1.0, reference.h) ||
      recording.samples() != reference.samples())
    throw ConfigError("recording and reference lie on different grids");
  const std::size_t n = recording.V.size();
  if (reference.V.size() != 1 && reference.V.size() != n)
    throw ConfigError("reference must hold one neuron or as many as the recording");
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& ref = reference.V.size() == 1 ? reference.V.front() : reference.V[r];
    for (std::size_t k = 0; k < ref.size(); ++k)
      worst = std::max(worst, std::abs(recording.V[r][k] - ref[k]));
  }
  return worst;
}

std::vector<double> crossing_times(const std::vector<double>& V, double h, double theta) {
  std::vector<double> t;
  for (std::size_t k = 1; k < V.size(); ++k) {
    if (!detect_threshold_crossing(V[k - 1], V[k], theta)) continue;
    const double frac = (theta - V[k - 1]) / (V[k] - V[k - 1]);
    t.push_back((static_cast<double>(k - 1) + frac) * h);
  }
  return t;
}

double last_spike_shift(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return kNaN;
  return std::abs(a[n - 1] - b[n - 1]);
}

SimulationConfig make_simulation_config(const ExperimentSpec& spec, const MethodSpec& method,
                                        double h, unsigned workers) {
  SimulationConfig cfg;
  cfg.h = h;
  cfg.duration = spec.duration;
  cfg.workers = workers;
  cfg.template_resolution = spec.template_resolution;
  cfg.wfr.scheme = method.scheme;
  cfg.wfr.spike_detection = method.spike_detection;
  cfg.wfr.wfr_tol = method.tolerance.value_or(spec.wfr_tol);
  cfg.wfr.max_iterations = spec.max_iterations;
  cfg.wfr.T = interval_length(spec, spec.network.build(), method, h);
  cfg.solver.tableau = ButcherTableau<double>::by_name(spec.tableau);
  cfg.solver.controller.tolerance = method.tolerance.value_or(spec.rk_tol);
  return cfg;
}

ErrorReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ErrorReport report;
  report.kind = spec.kind;
  const Network net = spec.network.build();
  const NeuronParams& params = spec.network.params;
  const std::vector<unsigned> worker_counts =
      spec.kind == Experiment::scaling ? spec.workers : std::vector<unsigned>{spec.workers.front()};

  for (double h : spec.h_values) {
    Recording ref;
    std::string ref_failure;
    try {
      ref = reference_run(params, spec.duration, h, spec.reference_tolerance, spec.tableau);
    } catch (const std::exception& e) {
      ref_failure = std::string("reference: ") + e.what();
    }
    const auto ref_spikes =
        ref.V.empty() ? std::vector<double>{} : crossing_times(ref.V.front(), h, params.theta);

    for (const auto& method : spec.methods) {
      std::optional<Recording> baseline;
      for (unsigned workers : worker_counts) {
        ReportRow row;
        row.scheme = to_string(method.scheme);
        row.method = method.label;
        row.h = h;
        row.wfr_tol = method.tolerance.value_or(spec.wfr_tol);
        row.rk_tol = method.tolerance.value_or(spec.rk_tol);
        row.spike_detection = method.spike_detection;
        row.neurons = net.size();
        row.workers = workers;
        row.error = kNaN;
        row.shift_ms = kNaN;
        try {
          row.T = interval_length(spec, net, method, h);
          if (!ref_failure.empty()) throw SolverError(ref_failure);
          const SimulationConfig cfg = make_simulation_config(spec, method, h, workers);
          std::vector<double> walls;
          SimulationResult res;
          for (unsigned rep = 0; rep < spec.repetitions; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            res = simulate(net, cfg);
            walls.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
          }
          row.wall_s = median(walls);
          row.error = max_error(res.recording, ref);
          row.shift_ms = last_spike_shift(
              crossing_times(res.recording.V.front(), h, params.theta), ref_spikes);
          row.mean_iters = res.stats.mean_iterations();
          row.rounds = res.stats.rounds();
          row.converged_fraction = res.stats.converged_fraction();
          row.rounds_per_s =
              spec.duration > 0.0 ? static_cast<double>(row.rounds) * 1000.0 / spec.duration : 0.0;
          if (row.converged_fraction < 1.0) row.status = "not_converged";
          if (spec.kind == Experiment::scaling) {
            if (!baseline)
              baseline = res.recording;
            else if (baseline->V != res.recording.V || baseline->spikes != res.recording.spikes)
              row.status = "mismatch";
          }
          if (spec.traces)
            report.traces.push_back(
                {trace_id(method, h, workers), h, res.recording.V.front(), ref.V.front()});
        } catch (const std::exception& e) {
          row.status = std::string("failed: ") + e.what();
        }
        report.rows.push_back(std::move(row));
      }
    }
  }

  if (spec.kind == Experiment::iterations) {
    // pair T = h with T = window for the same scheme and tolerance
    for (const auto& a : report.rows) {
      if (!a.ok()) continue;
      for (const auto& b : report.rows) {
        if (!b.ok() || &a == &b || a.scheme != b.scheme || a.h != b.h || a.wfr_tol != b.wfr_tol ||
            a.workers != b.workers)
          continue;
        const bool a_is_h = std::abs(a.T - a.h) <= 1e-12;
        if (a_is_h && b.T > a.T + 1e-12) report.payoffs.push_back(payoff(a, b));
      }
    }
  }
  return report;
}

std::string plot_script(const ExperimentSpec& spec, const ErrorReport& report) {
  std::vector<std::string> methods;
  for (const auto& r : report.rows)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);

  // results.csv columns are 1-based in gnuplot
  auto col = [](const std::string& name) {
    const auto& cols = report_columns();
    return std::to_string(std::find(cols.begin(), cols.end(), name) - cols.begin() + 1);
  };
  const std::string method_col = col("method");

  std::ostringstream os;
  os << "# gnuplot script for the " << to_string(spec.kind) << " experiment\n"
     << "set datafile separator ','\n"
     << "set key top left\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output 'plot_" << to_string(spec.kind) << ".png'\n";

  auto series = [&](const std::string& x, const std::string& y, const std::string& extra = "") {
    os << "plot ";
    for (std::size_t i = 0; i < methods.size(); ++i) {
      os << (i ? ", \\\n     " : "") << "'results.csv' every ::1 using ($" << x << "):(strcol("
         << method_col << ") eq '" << methods[i] << "' ? $" << y << " : NaN) with linespoints title '"
         << methods[i] << "'" << extra;
    }
    os << '\n';
  };

  switch (spec.kind) {
    case Experiment::accuracy:
      os << "set logscale xy\nset xlabel 'h (ms)'\nset ylabel 'max |V - V_ref| (mV)'\n";
      series(col("h"), col("error"));
      break;
    case Experiment::efficiency:
      os << "set logscale xy\nset xlabel 'max |V - V_ref| (mV)'\nset ylabel 'wall time (s)'\n";
      series(col("error"), col("wall_s"));
      break;
    case Experiment::iterations:
      os << "set logscale x\nset xlabel 'h (ms)'\nset ylabel 'mean iterations per interval'\n";
      series(col("h"), col("mean_iters"));
      break;
    case Experiment::scaling:
      os << "set logscale x 2\nset xlabel 'workers'\nset ylabel 'wall time (s)'\n";
      series(col("workers"), col("wall_s"));
      break;
    case Experiment::shift: {
      os << "set xlabel 'time (ms)'\nset ylabel 'V (mV)'\n";
      os << "plot ";
      bool first = true;
      for (const auto& t : report.traces) {
        if (first) {
          os << "'trace_" << t.id << ".csv' every ::1 using 1:3 with lines title 'reference'";
          first = false;
        }
        os << ", \\\n     'trace_" << t.id << ".csv' every ::1 using 1:2 with lines title '" << t.id
           << "'";
      }
      if (first) os << "NaN notitle";
      os << '\n';
      break;
    }
  }
  return os.str();
}

void write_outputs(const ExperimentSpec& spec, const ErrorReport& report) {
  const auto& dir = spec.out_dir;
  write_file(dir / "results.csv", [&](std::ostream& os) { report.write_csv(os); });
  write_file(dir / ("plot_" + to_string(spec.kind) + ".script"),
             [&](std::ostream& os) { os << plot_script(spec, report); });
  if (!report.payoffs.empty())
    write_file(dir / "payoff.csv", [&](std::ostream& os) { report.write_payoff_csv(os); });
  for (const auto& t : report.traces) {
    write_file(dir / ("trace_" + t.id + ".csv"), [&](std::ostream& os) {
      os << std::setprecision(std::numeric_limits<double>::max_digits10) << "time,V,V_ref\n";
      for (std::size_t k = 0; k < t.V.size(); ++k)
        os << static_cast<double>(k) * t.h << ',' << t.V[k] << ','
           << (k < t.V_ref.size() ? t.V_ref[k] : kNaN) << '\n';
    });
  }
}

}  // namespace gapwfr
