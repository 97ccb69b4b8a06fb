#ifndef GAPWFR_MODEL_HPP
#define GAPWFR_MODEL_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace gapwfr {

/// Thrown when an integration cannot proceed (non-finite state, step-size underflow).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for inconsistent parameters, networks or configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Layout of the Hodgkin-Huxley state vector. The membrane potential is always
// the first component.
enum StateIndex : int {
  kV = 0,   // membrane potential (mV)
  kM = 1,   // Na activation
  kH = 2,   // Na inactivation
  kN = 3,   // delayed-rectifier K activation
  kP = 4,   // Kv3 activation (unused by the squid-axon channel set)
  kSyn = 5, // synaptic input current (pA)
  kStateSize = 6
};

using StateVector = Eigen::Matrix<double, kStateSize, 1>;

/// Channel kinetics. `kv3_gap` is the Na/Kv1/Kv3 interneuron model used by
/// gap-junction enabled simulators; `squid_axon` is the classical HH set.
enum class ChannelSet { kv3_gap, squid_axon };

struct NeuronParams {
  ChannelSet channels = ChannelSet::kv3_gap;
  double C_m = 40.0;      // pF
  double g_Na = 4500.0;   // nS
  double g_K = 9.0;       // nS, n^4 delayed rectifier
  double g_Kv3 = 9000.0;  // nS, p^2 (ignored for squid_axon)
  double g_L = 10.0;      // nS
  double E_Na = 74.0;     // mV
  double E_K = -90.0;     // mV
  double E_L = -70.0;     // mV
  double theta = 0.0;     // spike registration threshold (mV)
  double V_spike = -40.0; // spike detection threshold (mV)
  double I_ext = 0.0;     // pA
  double tau_syn = 2.0;   // ms, decay of the synaptic input current

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// Classical squid-axon parameterization scaled to a 100 pF membrane.
  static NeuronParams squid_axon();

  bool operator==(const NeuronParams&) const = default;
};

struct NeuronState {
  StateVector y = StateVector::Zero();
  double t = 0.0;

  double V() const { return y[kV]; }
  double m() const { return y[kM]; }
  double h() const { return y[kH]; }
  double n() const { return y[kN]; }
};

/// Right-hand side of the neuron ODE. dV/dt receives
/// (gap_input + syn_input + I_ext + I_syn - I_ion) / C_m.
StateVector hh_rhs(const StateVector& y, const NeuronParams& params, double gap_input,
                   double syn_input);

inline StateVector hh_rhs(const NeuronState& state, const NeuronParams& params,
                          double gap_input, double syn_input) {
  return hh_rhs(state.y, params, gap_input, syn_input);
}

/// Ohmic gap-junction current into the `self` cell (pA).
constexpr double gap_current(double g, double V_self, double V_other) {
  return g * (V_other - V_self);
}

/// Delta-current jump of the synaptic input variable.
NeuronState apply_spike(NeuronState state, double weight);
void apply_spike(StateVector& y, double weight);

/// Upward crossing V_prev <= theta < V_curr.
constexpr bool detect_threshold_crossing(double V_prev, double V_curr, double theta) {
  return V_prev <= theta && theta < V_curr;
}

/// Fixed point of the dynamics for the given parameters (I_ext included).
/// The lowest-voltage equilibrium is returned.
StateVector resting_state(const NeuronParams& params);

/// Clamp gating variables into [0, 1].
void clamp_gating(StateVector& y);

/// Throws SolverError if any component is non-finite.
void require_finite(const StateVector& y, const std::string& where);

/// Adapter exposing a Hodgkin-Huxley neuron to the relaxation engine.
struct HhCell {
  using State = StateVector;
  static constexpr int kDim = kStateSize;

  NeuronParams params;

  State rhs(const State& y, double gap) const { return hh_rhs(y, params, gap, 0.0); }
  void project(State& y) const { clamp_gating(y); }
  void receive_spike(State& y, double weight) const { apply_spike(y, weight); }
  static double potential(const State& y) { return y[kV]; }
};

}  // namespace gapwfr

#endif  // GAPWFR_MODEL_HPP
