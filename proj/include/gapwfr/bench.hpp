#ifndef GAPWFR_BENCH_HPP
#define GAPWFR_BENCH_HPP

// Experiment harness: configuration matrices over step sizes and methods,
// errors against an uncoupled tight-tolerance reference, CSV and gnuplot output.

#include "gapwfr/model.hpp"
#include "gapwfr/network.hpp"
#include "gapwfr/relaxation.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gapwfr {

enum class Experiment { accuracy, efficiency, shift, iterations, scaling };

std::string to_string(Experiment kind);
Experiment experiment_from_string(const std::string& name);

/// One column of the configuration matrix. Tokens:
///   ni       non-iterative, constant extrapolation
///   ni_sd    non-iterative with spike detection
///   wfr      Jacobi waveform relaxation, T = window
///   wfr_h    Jacobi waveform relaxation, T = h
///   gs, gs_h Gauss-Seidel counterparts
/// An optional suffix "@<tol>" overrides both wfr_tol and the solver tolerance.
struct MethodSpec {
  std::string label;
  Scheme scheme = Scheme::jacobi;
  bool spike_detection = true;
  bool window_interval = true;
  std::optional<double> tolerance;

  static MethodSpec parse(const std::string& token);
};

struct NetworkSpec {
  // ring lattice unless explicit gaps or connections are given
  std::size_t neurons = 2;
  std::size_t degree = 1;
  double total_g = 30.0;  // nS per neuron
  NeuronParams params = default_params();
  double window = 1.0;  // ms, communication window of gap-only networks
  std::vector<GapJunction> gaps;
  std::vector<SpikeConnection> connections;

  bool is_explicit() const { return !gaps.empty() || !connections.empty(); }
  Network build() const;

  static NeuronParams default_params() {
    NeuronParams p;
    p.I_ext = 200.0;
    return p;
  }
};

struct ExperimentSpec {
  Experiment kind = Experiment::accuracy;
  std::vector<double> h_values;  // ms
  std::vector<MethodSpec> methods;
  double wfr_tol = 1e-6;  // mV
  double rk_tol = 1e-6;
  int max_iterations = 15;
  double duration = 1000.0;  // ms
  NetworkSpec network;
  std::vector<unsigned> workers{1};
  unsigned repetitions = 1;  // wall time is the median over repetitions
  double reference_tolerance = 1e-12;
  double template_resolution = 0.001;  // ms
  std::string tableau = "fehlberg45";
  std::filesystem::path out_dir = "out";
  bool traces = false;
  unsigned long seed = 0;  // reserved; every network here is deterministic

  static ExperimentSpec defaults(Experiment kind);
  void validate() const;
};

struct ReportRow {
  std::string scheme;
  double h = 0.0;
  double T = 0.0;
  double wfr_tol = 0.0;
  double error = 0.0;  // max |V - V_ref| over grid points and recorded neurons
  double wall_s = 0.0;
  double mean_iters = 0.0;
  long rounds = 0;
  double converged_fraction = 0.0;
  std::string method;
  bool spike_detection = false;
  double rk_tol = 0.0;
  std::size_t neurons = 0;
  unsigned workers = 1;
  double rounds_per_s = 0.0;  // per simulated second
  double shift_ms = 0.0;      // last common spike, interpolated crossing times
  std::string status = "ok";

  bool ok() const { return status == "ok" || status == "not_converged"; }
};

/// The relaxation window pays off iff T_new/T_old > iota_new/iota_old.
struct PayoffRow {
  double h = 0.0;
  double T_old = 0.0;
  double T_new = 0.0;
  double iota_old = 0.0;
  double iota_new = 0.0;
  long rounds_old = 0;
  long rounds_new = 0;
  double T_ratio = 0.0;
  double iota_ratio = 0.0;
  bool predicted_new_wins = false;
  bool observed_new_wins = false;

  bool agrees() const { return predicted_new_wins == observed_new_wins; }
};

PayoffRow payoff(const ReportRow& T_old, const ReportRow& T_new);

/// Membrane potential of neuron 0 next to the reference, one per run.
struct Trace {
  std::string id;
  double h = 0.0;
  std::vector<double> V;
  std::vector<double> V_ref;
};

struct ErrorReport {
  Experiment kind = Experiment::accuracy;
  std::vector<ReportRow> rows;
  std::vector<PayoffRow> payoffs;
  std::vector<Trace> traces;

  void write_csv(std::ostream& os) const;
  void write_payoff_csv(std::ostream& os) const;
};

/// Column order of results.csv.
const std::vector<std::string>& report_columns();

/// Uncoupled single neuron (input current params.I_ext) at tight tolerance,
/// recorded on the h-grid.
Recording reference_run(const NeuronParams& params, double duration, double h,
                        double tolerance = 1e-12, const std::string& tableau = "fehlberg45");

/// max |V - V_ref| over all grid points and recorded neurons. A single-neuron
/// reference is compared against every recorded neuron.
double max_error(const Recording& recording, const Recording& reference);

/// Upward theta crossings, linearly interpolated between grid points.
std::vector<double> crossing_times(const std::vector<double>& V, double h, double theta);

/// |a_k - b_k| for the last index k present in both spike trains; NaN when either is empty.
double last_spike_shift(const std::vector<double>& a, const std::vector<double>& b);

/// Simulation settings for one cell of the configuration matrix.
SimulationConfig make_simulation_config(const ExperimentSpec& spec, const MethodSpec& method,
                                        double h, unsigned workers);

/// Runs the configuration matrix. Failing configurations become rows with a
/// failure status; the remaining ones still run.
ErrorReport run_experiment(const ExperimentSpec& spec);

/// Writes results.csv, plot_<experiment>.script and, when present, payoff.csv
/// and trace_<id>.csv into spec.out_dir.
void write_outputs(const ExperimentSpec& spec, const ErrorReport& report);

std::string plot_script(const ExperimentSpec& spec, const ErrorReport& report);

}  // namespace gapwfr

#endif  // GAPWFR_BENCH_HPP
