#include "gapwfr/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace gapwfr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "")
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != static_cast<double>(static_cast<long>(x)))
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long>(x);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long x = to_long(key, v);
  if (x < 0) throw ConfigError("'" + key + "' must not be negative");
  return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> words(const std::string& v) {
  std::vector<std::string> out;
  std::string w;
  for (char c : v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!w.empty()) out.push_back(w);
      w.clear();
    } else {
      w += c;
    }
  }
  if (!w.empty()) out.push_back(w);
  return out;
}

std::vector<std::vector<double>> records(const std::string& key, const std::string& v,
                                         std::size_t fields) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto w = words(item);
    if (w.empty()) continue;
    if (w.size() != fields)
      throw ConfigError("'" + key + "' entries need " + std::to_string(fields) + " fields");
    std::vector<double> rec;
    for (const auto& x : w) rec.push_back(to_double(key, x));
    out.push_back(rec);
  }
  return out;
}

using Setter = std::function<void(const std::string&)>;

void apply(const IniSection& section, const std::string& name,
           const std::map<std::string, Setter>& setters) {
  for (const auto& [key, value] : section) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    it->second(value);
  }
}

const IniSection* find_section(const IniDocument& doc, const std::string& name) {
  auto it = doc.find(name);
  return it == doc.end() ? nullptr : &it->second;
}

void check_sections(const IniDocument& doc, std::initializer_list<const char*> allowed) {
  for (const auto& [name, section] : doc) {
    (void)section;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return name == a; }))
      throw ConfigError("unknown section [" + name + "]");
  }
}

}  // namespace

IniDocument parse_ini(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  IniDocument doc;
  for (const auto& [name, child] : tree) {
    if (child.empty()) throw ConfigError("key '" + name + "' outside of any section");
    auto& section = doc[name];
    for (const auto& [key, value] : child) section[key] = trim(value.data());
  }
  return doc;
}

IniDocument load_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_ini(in);
}

void apply_neuron_section(const IniSection& section, NeuronParams& p) {
  auto ch = section.find("channels");
  if (ch != section.end()) {
    if (ch->second == "squid_axon")
      p = NeuronParams::squid_axon();
    else if (ch->second == "kv3_gap")
      p = NeuronParams{};
    else
      throw ConfigError("unknown channel set '" + ch->second + "'");
  }
  auto num = [](double& field, const char* key) {
    return [&field, key](const std::string& v) { field = to_double(key, v); };
  };
  apply(section, "neuron",
        {{"channels", [](const std::string&) {}},
         {"C_m", num(p.C_m, "C_m")},
         {"g_Na", num(p.g_Na, "g_Na")},
         {"g_K", num(p.g_K, "g_K")},
         {"g_Kv3", num(p.g_Kv3, "g_Kv3")},
         {"g_L", num(p.g_L, "g_L")},
         {"E_Na", num(p.E_Na, "E_Na")},
         {"E_K", num(p.E_K, "E_K")},
         {"E_L", num(p.E_L, "E_L")},
         {"theta", num(p.theta, "theta")},
         {"V_spike", num(p.V_spike, "V_spike")},
         {"I_ext", num(p.I_ext, "I_ext")},
         {"tau_syn", num(p.tau_syn, "tau_syn")}});
  p.validate();
}

void apply_network_section(const IniSection& section, NetworkSpec& spec) {
  apply(section, "network",
        {{"neurons", [&](const std::string& v) { spec.neurons = to_count("neurons", v); }},
         {"degree", [&](const std::string& v) { spec.degree = to_count("degree", v); }},
         {"total_g", [&](const std::string& v) { spec.total_g = to_double("total_g", v); }},
         {"window", [&](const std::string& v) { spec.window = to_double("window", v); }},
         {"gaps",
          [&](const std::string& v) {
            spec.gaps.clear();
            for (const auto& r : records("gaps", v, 3)) {
              if (r[0] < 0 || r[1] < 0) throw ConfigError("gap endpoints must not be negative");
              spec.gaps.push_back({static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1]), r[2]});
            }
          }},
         {"connections", [&](const std::string& v) {
            spec.connections.clear();
            for (const auto& r : records("connections", v, 4)) {
              if (r[0] < 0 || r[1] < 0) throw ConfigError("connection endpoints must not be negative");
              spec.connections.push_back(
                  {static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1]), r[2], r[3]});
            }
          }}});
}

void apply_wfr_section(const IniSection& section, WfrConfig& wfr) {
  apply(section, "wfr",
        {{"T", [&](const std::string& v) { wfr.T = to_double("T", v); }},
         {"wfr_tol", [&](const std::string& v) { wfr.wfr_tol = to_double("wfr_tol", v); }},
         {"max_iterations",
          [&](const std::string& v) { wfr.max_iterations = static_cast<int>(to_long("max_iterations", v)); }},
         {"scheme", [&](const std::string& v) { wfr.scheme = scheme_from_string(v); }},
         {"spike_detection",
          [&](const std::string& v) { wfr.spike_detection = to_bool("spike_detection", v); }}});
}

void apply_solver_section(const IniSection& section, SolverSettings& solver) {
  auto& c = solver.controller;
  auto num = [](double& field, const char* key) {
    return [&field, key](const std::string& v) { field = to_double(key, v); };
  };
  apply(section, "solver",
        {{"tableau",
          [&](const std::string& v) {
            solver.tableau = ButcherTableau<double>::by_name(v);
            c.embedded_order = solver.tableau.embedded_order;
          }},
         {"tolerance", num(c.tolerance, "tolerance")},
         {"safety", num(c.safety, "safety")},
         {"growth_cap", num(c.growth_cap, "growth_cap")},
         {"shrink_floor", num(c.shrink_floor, "shrink_floor")},
         {"min_step", num(c.min_step, "min_step")},
         {"max_step", num(c.max_step, "max_step")}});
}

void apply_experiment_config(const IniDocument& doc, ExperimentSpec& spec) {
  check_sections(doc, {"experiment", "neuron", "network"});
  if (const auto* s = find_section(doc, "experiment")) {
    apply(*s, "experiment",
          {{"h",
            [&](const std::string& v) {
              spec.h_values.clear();
              for (const auto& w : words(v)) spec.h_values.push_back(to_double("h", w));
            }},
           {"methods",
            [&](const std::string& v) {
              spec.methods.clear();
              for (const auto& w : words(v)) spec.methods.push_back(MethodSpec::parse(w));
            }},
           {"duration", [&](const std::string& v) { spec.duration = to_double("duration", v); }},
           {"wfr_tol", [&](const std::string& v) { spec.wfr_tol = to_double("wfr_tol", v); }},
           {"rk_tol", [&](const std::string& v) { spec.rk_tol = to_double("rk_tol", v); }},
           {"max_iterations",
            [&](const std::string& v) { spec.max_iterations = static_cast<int>(to_long("max_iterations", v)); }},
           {"workers",
            [&](const std::string& v) {
              spec.workers.clear();
              for (const auto& w : words(v))
                spec.workers.push_back(static_cast<unsigned>(to_count("workers", w)));
            }},
           {"repetitions",
            [&](const std::string& v) { spec.repetitions = static_cast<unsigned>(to_count("repetitions", v)); }},
           {"reference_tolerance",
            [&](const std::string& v) { spec.reference_tolerance = to_double("reference_tolerance", v); }},
           {"template_resolution",
            [&](const std::string& v) { spec.template_resolution = to_double("template_resolution", v); }},
           {"tableau", [&](const std::string& v) { spec.tableau = v; }},
           {"traces", [&](const std::string& v) { spec.traces = to_bool("traces", v); }}});
  }
  if (const auto* s = find_section(doc, "neuron")) apply_neuron_section(*s, spec.network.params);
  if (const auto* s = find_section(doc, "network")) apply_network_section(*s, spec.network);
  spec.validate();
}

SimulationSetup simulation_from_config(const IniDocument& doc) {
  check_sections(doc, {"simulation", "wfr", "solver", "neuron", "network"});
  SimulationSetup setup;
  auto& cfg = setup.config;
  if (const auto* s = find_section(doc, "neuron")) apply_neuron_section(*s, setup.network.params);
  if (const auto* s = find_section(doc, "network")) apply_network_section(*s, setup.network);
  if (const auto* s = find_section(doc, "simulation")) {
    apply(*s, "simulation",
          {{"h", [&](const std::string& v) { cfg.h = to_double("h", v); }},
           {"duration", [&](const std::string& v) { cfg.duration = to_double("duration", v); }},
           {"record",
            [&](const std::string& v) {
              cfg.record.clear();
              for (const auto& w : words(v)) cfg.record.push_back(to_count("record", w));
            }},
           {"workers", [&](const std::string& v) { cfg.workers = static_cast<unsigned>(to_count("workers", v)); }},
           {"template_resolution",
            [&](const std::string& v) { cfg.template_resolution = to_double("template_resolution", v); }}});
  }
  const Network net = setup.network.build();
  cfg.wfr.T = min_delay(net, setup.network.window);
  if (const auto* s = find_section(doc, "wfr")) apply_wfr_section(*s, cfg.wfr);
  if (const auto* s = find_section(doc, "solver")) apply_solver_section(*s, cfg.solver);
  if (cfg.workers == 0) throw ConfigError("workers must be positive");
  net.validate(cfg.h);
  cfg.wfr.validate(cfg.h);
  return setup;
}

}  // namespace gapwfr
