// wfrbench: experiment and simulation front end.

#include "gapwfr/bench.hpp"
#include "gapwfr/config.hpp"
#include "gapwfr/recording_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace gapwfr;

struct Options {
  std::string config;
  std::string out;
  std::optional<unsigned> workers;
  unsigned long seed = 0;
};

std::vector<unsigned> worker_ladder(unsigned max_workers) {
  std::vector<unsigned> w;
  for (unsigned n = 1; n < max_workers; n *= 2) w.push_back(n);
  w.push_back(max_workers);
  return w;
}

void print_rows(const ErrorReport& report) {
  std::printf("%-12s %8s %6s %9s %11s %9s %8s %8s %9s %s\n", "method", "h", "T", "wfr_tol",
              "error", "wall_s", "iters", "rounds", "shift_ms", "status");
  for (const auto& r : report.rows)
    std::printf("%-12s %8g %6g %9.1e %11.4e %9.3f %8.3f %8ld %9.4f %s\n", r.method.c_str(), r.h,
                r.T, r.wfr_tol, r.error, r.wall_s, r.mean_iters, r.rounds, r.shift_ms,
                r.status.c_str());
  for (const auto& p : report.payoffs)
    std::printf("h=%g: T ratio %.3g vs iteration ratio %.3g -> %s (rounds %ld vs %ld)%s\n", p.h,
                p.T_ratio, p.iota_ratio, p.predicted_new_wins ? "T=window wins" : "T=h wins",
                p.rounds_new, p.rounds_old, p.agrees() ? "" : "  [flag disagrees with counts]");
}

int run_experiment_command(Experiment kind, const Options& opt) {
  ExperimentSpec spec = ExperimentSpec::defaults(kind);
  if (!opt.config.empty()) apply_experiment_config(load_ini(opt.config), spec);
  if (!opt.out.empty()) spec.out_dir = opt.out;
  if (opt.workers) {
    if (*opt.workers == 0) throw ConfigError("--workers must be positive");
    spec.workers = kind == Experiment::scaling ? worker_ladder(*opt.workers)
                                               : std::vector<unsigned>{*opt.workers};
  }
  spec.seed = opt.seed;
  const ErrorReport report = run_experiment(spec);
  write_outputs(spec, report);
  print_rows(report);
  std::printf("wrote %s\n", (spec.out_dir / "results.csv").string().c_str());
  bool all_ok = true;
  for (const auto& r : report.rows) all_ok = all_ok && r.ok();
  return all_ok ? 0 : 3;
}

int run_simulate_command(const Options& opt) {
  SimulationSetup setup;
  if (!opt.config.empty()) setup = simulation_from_config(load_ini(opt.config));
  if (opt.workers) setup.config.workers = *opt.workers;
  const std::filesystem::path out = opt.out.empty() ? "out/simulate" : opt.out;
  const Network net = setup.network.build();
  const auto start = std::chrono::steady_clock::now();
  const SimulationResult res = simulate(net, setup.config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(out / "recording.csv", [&](std::ostream& os) { write_recording_csv(os, res.recording); });
  write_file(out / "spikes.csv", [&](std::ostream& os) { write_spikes_csv(os, res.recording); });
  write_file(out / "stats.csv", [&](std::ostream& os) { res.stats.write_csv(os); });
  std::size_t spikes = 0;
  for (const auto& s : res.recording.spikes) spikes += s.size();
  std::printf("neurons %zu, intervals %zu, mean iterations %.3f, rounds %ld, converged %.3f, "
              "spikes %zu, wall %.3f s\n",
              net.size(), res.stats.intervals(), res.stats.mean_iterations(), res.stats.rounds(),
              res.stats.converged_fraction(), spikes, wall);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Waveform relaxation benchmarks for gap-junction coupled neuron networks"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (scaling: largest count)");
    sub->add_option("--seed", opt.seed, "reserved; networks are deterministic");
  };

  std::vector<std::pair<CLI::App*, Experiment>> experiments;
  for (auto [name, kind, help] :
       {std::tuple{"accuracy", Experiment::accuracy, "error versus step size"},
        std::tuple{"efficiency", Experiment::efficiency, "wall time versus error"},
        std::tuple{"shift", Experiment::shift, "artefactual spike shift of the non-iterative scheme"},
        std::tuple{"iterations", Experiment::iterations, "mean iterations for T = h and T = window"},
        std::tuple{"scaling", Experiment::scaling, "wall time versus worker count"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    experiments.emplace_back(sub, kind);
  }
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a configured network");
  add_common(simulate_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate_cmd->parsed()) return run_simulate_command(opt);
    for (const auto& [sub, kind] : experiments)
      if (sub->parsed()) return run_experiment_command(kind, opt);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
