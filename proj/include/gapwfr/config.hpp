#ifndef GAPWFR_CONFIG_HPP
#define GAPWFR_CONFIG_HPP

// INI-style configuration: `key = value` lines under [section] headers,
// full-line comments starting with ';' or '#'. Unknown keys are errors.

#include "gapwfr/bench.hpp"
#include "gapwfr/network.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace gapwfr {

using IniSection = std::map<std::string, std::string>;
using IniDocument = std::map<std::string, IniSection>;

IniDocument parse_ini(std::istream& in);
IniDocument load_ini(const std::filesystem::path& path);

/// [neuron]: channels, C_m, g_Na, g_K, g_Kv3, g_L, E_Na, E_K, E_L, theta, V_spike,
/// I_ext, tau_syn. `channels = squid_axon` starts from the squid-axon preset.
void apply_neuron_section(const IniSection& section, NeuronParams& params);

/// [network]: neurons, degree, total_g, window, gaps ("a b g; ..."),
/// connections ("source target weight delay; ...").
void apply_network_section(const IniSection& section, NetworkSpec& spec);

/// [wfr]: T, wfr_tol, max_iterations, scheme, spike_detection.
void apply_wfr_section(const IniSection& section, WfrConfig& wfr);

/// [solver]: tableau, tolerance, safety, growth_cap, shrink_floor, min_step, max_step.
void apply_solver_section(const IniSection& section, SolverSettings& solver);

/// Sections [experiment], [neuron] and [network] on top of the experiment defaults.
/// [experiment] keys: h, methods, duration, wfr_tol, rk_tol, max_iterations, workers,
/// repetitions, reference_tolerance, template_resolution, tableau, traces.
void apply_experiment_config(const IniDocument& doc, ExperimentSpec& spec);

struct SimulationSetup {
  NetworkSpec network;
  SimulationConfig config;
};

/// Sections [simulation] (h, duration, record, workers, template_resolution),
/// [wfr], [solver], [neuron] and [network].
SimulationSetup simulation_from_config(const IniDocument& doc);

}  // namespace gapwfr

#endif  // GAPWFR_CONFIG_HPP
