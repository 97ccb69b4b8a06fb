// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance               run all criteria
//   acceptance --criterion 4 run one

#include "gapwfr/bench.hpp"
#include "gapwfr/picard.hpp"
#include "gapwfr/waveform.hpp"

#include <CLI11.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>

using namespace gapwfr;

namespace {

// criterion 1
constexpr double kSymmetryMaxError = 1e-3;  // mV
constexpr double kSymmetryMaxRuntime = 30.0;  // s
constexpr double kSymmetryWfrTol = 1e-6;
// criterion 2
constexpr double kShiftFactor = 10.0;
// criterion 4
constexpr double kIterWfrTol = 1e-4;
constexpr double kIterSpread = 2.0;
constexpr double kIterRatioLow = 1.3, kIterRatioHigh = 3.5;
constexpr double kIterDiffLow = 2.0, kIterDiffHigh = 6.0;
// criterion 6
constexpr double kCubicTol = 1e-12;
constexpr double kHermiteOrder = 3.5;
// criterion 7
constexpr double kPicardR2 = 0.95;
// criterion 9
constexpr double kScaledFactor = 10.0;  // times wfr_tol
constexpr double kScaledWfrTol = 1e-4;
// criterion 10
constexpr double kSpeedup = 2.0;
constexpr unsigned kSpeedupWorkers = 8;

const std::vector<double> kSweep{0.1, 0.05, 0.02, 0.01};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentSpec two_neuron(Experiment kind, std::vector<double> h, std::vector<std::string> methods) {
  ExperimentSpec spec = ExperimentSpec::defaults(kind);
  spec.h_values = std::move(h);
  spec.methods.clear();
  for (const auto& m : methods) spec.methods.push_back(MethodSpec::parse(m));
  spec.duration = 1000.0;
  spec.repetitions = 1;
  spec.workers = {1};
  spec.traces = false;
  return spec;
}

const ReportRow& find_row(const ErrorReport& r, const std::string& method, double h) {
  for (const auto& row : r.rows)
    if (row.method == method && std::abs(row.h - h) < 1e-12) return row;
  throw std::runtime_error("missing row " + method);
}

Outcome symmetry() {
  auto spec = two_neuron(Experiment::accuracy, {0.1}, {"wfr"});
  spec.wfr_tol = spec.rk_tol = kSymmetryWfrTol;
  const auto report = run_experiment(spec);
  const auto& r = report.rows.at(0);
  const bool pass = r.ok() && r.error <= kSymmetryMaxError && r.wall_s < kSymmetryMaxRuntime;
  return {pass, fmt("max|V - V_ref| = %.4g mV (limit %g), runtime %.2f s (limit %g)", r.error,
                    kSymmetryMaxError, r.wall_s, kSymmetryMaxRuntime)};
}

Outcome shift() {
  const auto report = run_experiment(two_neuron(Experiment::shift, {0.1}, {"ni_sd", "wfr"}));
  const double ni = find_row(report, "ni_sd", 0.1).shift_ms;
  const double wfr = find_row(report, "wfr", 0.1).shift_ms;
  const bool pass = std::isfinite(ni) && std::isfinite(wfr) && ni >= kShiftFactor * wfr;
  return {pass, fmt("last-spike shift: non-iterative with detection %.4g ms, WFR %.4g ms, ratio %.3g "
                    "(required >= %g)",
                    ni, wfr, ni / wfr, kShiftFactor)};
}

Outcome ordering() {
  const auto report = run_experiment(two_neuron(Experiment::accuracy, kSweep, {"wfr", "ni_sd", "ni"}));
  bool pass = true;
  std::string detail;
  for (double h : kSweep) {
    const double w = find_row(report, "wfr", h).error;
    const double sd = find_row(report, "ni_sd", h).error;
    const double ni = find_row(report, "ni", h).error;
    const bool ok = w < sd && sd < ni;
    pass = pass && ok;
    detail += fmt("h=%g: %.3g < %.3g < %.3g %s; ", h, w, sd, ni, ok ? "ok" : "violated");
  }
  return {pass, detail};
}

const ErrorReport& iteration_report() {
  static const ErrorReport report = [] {
    auto spec = two_neuron(Experiment::iterations, kSweep, {"wfr_h", "wfr"});
    spec.wfr_tol = kIterWfrTol;
    spec.network.window = 1.0;
    return run_experiment(spec);
  }();
  return report;
}

Outcome iterations() {
  const auto& report = iteration_report();
  double lo = 1e300, hi = -1e300;
  bool ratios = true, diffs = true;
  std::string detail;
  for (double h : kSweep) {
    const double ih = find_row(report, "wfr_h", h).mean_iters;
    const double iw = find_row(report, "wfr", h).mean_iters;
    lo = std::min(lo, ih);
    hi = std::max(hi, ih);
    const double ratio = iw / ih, diff = iw - ih;
    ratios = ratios && ratio >= kIterRatioLow && ratio <= kIterRatioHigh;
    diffs = diffs && diff >= kIterDiffLow && diff <= kIterDiffHigh;
    detail += fmt("h=%g: T=h %.3f, T=1 %.3f, ratio %.3f, diff %.3f; ", h, ih, iw, ratio, diff);
  }
  const bool spread = hi - lo <= kIterSpread;
  detail += fmt("(a) spread %.3f %s (b) %s (c) %s", hi - lo, spread ? "ok" : "violated",
                ratios ? "ok" : "violated", diffs ? "ok" : "violated");
  return {spread && ratios && diffs, detail};
}

Outcome communication() {
  const auto& report = iteration_report();
  bool pass = report.payoffs.size() == kSweep.size();
  std::string detail;
  for (const auto& p : report.payoffs) {
    const bool ok = p.rounds_new < p.rounds_old && p.agrees();
    pass = pass && ok;
    detail += fmt("h=%g: rounds %ld (T=1) vs %ld (T=h), flag %s; ", p.h, p.rounds_new, p.rounds_old,
                  p.agrees() ? "agrees" : "disagrees");
  }
  return {pass, detail};
}

Outcome hermite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-10.0, 10.0), pos(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const auto f = [&](double t) { return ((a * t + b) * t + c) * t + d; };
    const auto df = [&](double t) { return (3 * a * t + 2 * b) * t + c; };
    Eigen::VectorXd v(11), dv(11);
    for (int u = 0; u <= 10; ++u) {
      v[u] = f(0.1 * u);
      dv[u] = df(0.1 * u);
    }
    const auto w = hermite_waveform(0.0, 0.1, v, dv);
    const double t = pos(rng);
    worst = std::max(worst, std::abs(w(t) - f(t)) / std::max(std::abs(f(t)), 1.0));
  }
  const double omega = 2.0 * std::numbers::pi / 5.0;
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const int n = static_cast<int>(std::lround(5.0 / h));
    Eigen::VectorXd v(n + 1), dv(n + 1);
    for (int u = 0; u <= n; ++u) {
      v[u] = std::sin(omega * u * h);
      dv[u] = omega * std::cos(omega * u * h);
    }
    const auto w = hermite_waveform(0.0, h, v, dv);
    double e = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double t = 5.0 * k / 10000.0;
      e = std::max(e, std::abs(w(t) - std::sin(omega * t)));
    }
    err.push_back(e);
  }
  double order = 1e300;
  for (std::size_t k = 1; k < err.size(); ++k) order = std::min(order, std::log2(err[k - 1] / err[k]));
  return {worst <= kCubicTol && order >= kHermiteOrder,
          fmt("cubic reproduction %.3g (limit %g), minimum observed order %.3f (limit %g)", worst,
              kCubicTol, order, kHermiteOrder)};
}

Outcome superlinear() {
  Eigen::Matrix2d A;
  A << -1.0, 1.0, 1.0, -1.0;
  const Eigen::Vector2d b(0.5, -0.25), y0(1.0, 0.0);
  const double T = 1.0, h = 0.05;
  StepController<double> ctrl;
  ctrl.tolerance = 1e-12;
  const auto iters = picard_iterate<double, 2>(A, b, y0, 0.0, T, h, 9,
                                               ButcherTableau<double>::fehlberg45(), ctrl);
  auto exact = [&](double t) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    M.topLeftCorner<2, 2>() = A * t;
    M.topRightCorner<2, 1>() = b * t;
    const Eigen::Matrix3d E = M.exp();
    return Eigen::Vector2d(E.topLeftCorner<2, 2>() * y0 + E.topRightCorner<2, 1>());
  };
  const int steps = grid_steps(T, h);
  std::vector<double> e;
  double e0 = 0.0;
  for (int u = 1; u <= steps; ++u) e0 = std::max(e0, (y0 - exact(u * h)).cwiseAbs().maxCoeff());
  e.push_back(e0);
  for (const auto& g : iters) {
    double worst = 0.0;
    for (int u = 1; u <= steps; ++u)
      worst = std::max(worst, (g.values.col(u) - exact(u * h)).cwiseAbs().maxCoeff());
    e.push_back(worst);
  }
  bool monotone = true;
  for (int m = 2; m <= 6; ++m) monotone = monotone && e[m + 1] / e[m] < e[m] / e[m - 1];

  const auto n = static_cast<Eigen::Index>(e.size());
  Eigen::VectorXd logfact = Eigen::VectorXd::Zero(n), loge(n);
  for (Eigen::Index m = 1; m < n; ++m) logfact[m] = logfact[m - 1] + std::log(double(m));
  Eigen::MatrixXd X(n, 2);
  for (Eigen::Index m = 0; m < n; ++m) {
    X(m, 0) = 1.0;
    X(m, 1) = double(m);
    loge[m] = std::log(e[static_cast<std::size_t>(m)]);
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(Eigen::VectorXd(loge + logfact));
  const Eigen::VectorXd fit = X * c - logfact;
  const double r2 = 1.0 - (loge - fit).squaredNorm() / (loge.array() - loge.mean()).matrix().squaredNorm();
  std::string ratios;
  for (int m = 1; m <= 7; ++m) ratios += fmt("%.3f ", e[m + 1] / e[m]);
  return {monotone && r2 >= kPicardR2,
          fmt("ratios e_{m+1}/e_m: %s%s, fitted K*T = %.3f, R^2 = %.4f (limit %g)", ratios.c_str(),
              monotone ? "decreasing" : "not decreasing", std::exp(c[1]), r2, kPicardR2)};
}

SimulationConfig scaled_config(double duration, double tol, unsigned workers) {
  SimulationConfig cfg;
  cfg.h = 0.1;
  cfg.duration = duration;
  cfg.wfr.T = 1.0;
  cfg.wfr.wfr_tol = tol;
  cfg.solver.controller.tolerance = tol;
  cfg.workers = workers;
  return cfg;
}

Outcome determinism() {
  const Network net = build_scaled_network(200, 60, 30.0, NetworkSpec::default_params());
  const auto ref = simulate(net, scaled_config(100.0, 1e-4, 1));
  bool pass = true;
  std::string detail;
  for (unsigned w : {2u, 4u, 8u}) {
    const auto res = simulate(net, scaled_config(100.0, 1e-4, w));
    const bool same = res.recording.V == ref.recording.V && res.stats.iterations == ref.stats.iterations;
    pass = pass && same;
    detail += fmt("%u workers %s; ", w, same ? "bit-identical" : "DIFFER");
  }
  return {pass, detail};
}

Outcome scaled_independence() {
  std::vector<std::vector<double>> traces;
  std::string detail;
  for (std::size_t v : {62u, 200u, 1000u}) {
    SimulationConfig cfg = scaled_config(200.0, kScaledWfrTol, std::max(1u, std::thread::hardware_concurrency()));
    cfg.record = {0};
    const auto res = simulate(build_scaled_network(v, 60, 30.0, NetworkSpec::default_params()), cfg);
    traces.push_back(res.recording.V[0]);
  }
  double worst = 0.0;
  for (std::size_t a = 1; a < traces.size(); ++a)
    for (std::size_t k = 0; k < traces[0].size(); ++k)
      worst = std::max(worst, std::abs(traces[a][k] - traces[0][k]));
  const double limit = kScaledFactor * kScaledWfrTol;
  return {worst <= limit, fmt("max deviation of neuron 0 across v = 62, 200, 1000: %.3g mV (limit %g)",
                              worst, limit)};
}

Outcome speedup() {
  auto spec = ExperimentSpec::defaults(Experiment::scaling);
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  spec.workers.clear();
  for (unsigned w = 1; w < kSpeedupWorkers; w *= 2) spec.workers.push_back(w);
  spec.workers.push_back(kSpeedupWorkers);
  const auto report = run_experiment(spec);
  std::vector<double> wall;
  std::string detail = fmt("hardware threads %u; ", cores);
  bool ok_rows = true;
  for (const auto& r : report.rows) {
    wall.push_back(r.wall_s);
    ok_rows = ok_rows && r.status == "ok";
    detail += fmt("%u workers %.2f s; ", r.workers, r.wall_s);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < wall.size() && spec.workers[k] <= cores; ++k)
    monotone = monotone && wall[k] < wall[k - 1];
  const double s = wall.front() / wall.back();
  detail += fmt("speedup at %u workers %.2fx (required >= %g), monotone up to the core count: %s",
                kSpeedupWorkers, s, kSpeedup, monotone ? "yes" : "no");
  return {ok_rows && monotone && s >= kSpeedup, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "symmetry / zero-coupling exactness", symmetry},
      {2, "artefactual shift", shift},
      {3, "accuracy ordering", ordering},
      {4, "iteration counts", iterations},
      {5, "communication reduction", communication},
      {6, "Hermite properties", hermite},
      {7, "superlinear convergence", superlinear},
      {8, "determinism under parallelism", determinism},
      {9, "scaled-network independence", scaled_independence},
      {10, "wall-clock speedup", speedup},
  };

  bool all_pass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), s);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
