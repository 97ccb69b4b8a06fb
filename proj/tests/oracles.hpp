#ifndef GAPWFR_TESTS_ORACLES_HPP
#define GAPWFR_TESTS_ORACLES_HPP

// Reference computations written independently of the library's solver code.

#include "gapwfr/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using gapwfr::StateVector;

// Classical fourth-order Runge-Kutta at a fixed step.
template <class Rhs>
StateVector rk4_step(const Rhs& f, double t, const StateVector& y, double dt) {
  const StateVector k1 = f(t, y);
  const StateVector k2 = f(t + 0.5 * dt, StateVector(y + 0.5 * dt * k1));
  const StateVector k3 = f(t + 0.5 * dt, StateVector(y + 0.5 * dt * k2));
  const StateVector k4 = f(t + dt, StateVector(y + dt * k3));
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fixed-step RK4 trajectory of an uncoupled neuron, stored every `stride` steps.
inline std::vector<StateVector> hh_trajectory(const gapwfr::NeuronParams& p, StateVector y,
                                              double dt, long steps, long stride = 1) {
  const auto f = [&](double, const StateVector& s) { return gapwfr::hh_rhs(s, p, 0.0, 0.0); };
  std::vector<StateVector> out{y};
  for (long k = 1; k <= steps; ++k) {
    y = rk4_step(f, (k - 1) * dt, y, dt);
    if (k % stride == 0) out.push_back(y);
  }
  return out;
}

// Scalar Runge-Kutta-Fehlberg 4(5) with the usual controller; no grid constraints.
struct Rkf45Stats {
  long accepted = 0;
  long rejected = 0;
};

template <class Rhs>
Rkf45Stats rkf45_count(const Rhs& f, StateVector y, double t0, double t1, double tol,
                       double dt, double max_step) {
  static const double a21 = 1.0 / 4;
  static const double a31 = 3.0 / 32, a32 = 9.0 / 32;
  static const double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
  static const double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513, a54 = -845.0 / 4104;
  static const double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565, a64 = 1859.0 / 4104,
                      a65 = -11.0 / 40;
  static const std::array<double, 6> b5 = {16.0 / 135, 0, 6656.0 / 12825, 28561.0 / 56430,
                                           -9.0 / 50, 2.0 / 55};
  static const std::array<double, 6> b4 = {25.0 / 216, 0, 1408.0 / 2565, 2197.0 / 4104,
                                           -1.0 / 5, 0};
  Rkf45Stats st;
  double t = t0;
  while (t < t1 - 1e-12) {
    const double step = std::min(dt, t1 - t);
    const StateVector k1 = f(t, y);
    const StateVector k2 = f(t + step / 4, StateVector(y + step * a21 * k1));
    const StateVector k3 = f(t + 3 * step / 8, StateVector(y + step * (a31 * k1 + a32 * k2)));
    const StateVector k4 =
        f(t + 12 * step / 13, StateVector(y + step * (a41 * k1 + a42 * k2 + a43 * k3)));
    const StateVector k5 =
        f(t + step, StateVector(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const StateVector k6 = f(t + step / 2, StateVector(y + step * (a61 * k1 + a62 * k2 + a63 * k3 +
                                                                   a64 * k4 + a65 * k5)));
    const std::array<StateVector, 6> k = {k1, k2, k3, k4, k5, k6};
    StateVector y5 = y, diff = StateVector::Zero();
    for (int i = 0; i < 6; ++i) {
      y5 += step * b5[i] * k[i];
      diff += step * (b5[i] - b4[i]) * k[i];
    }
    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) err = std::max(err, std::abs(diff[i]) / std::max(std::abs(y[i]), 1.0));
    double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(tol / err, 0.2);
    factor = std::clamp(factor, 0.2, 5.0);
    if (err <= tol) {
      y = y5;
      gapwfr::clamp_gating(y);
      t += step;
      ++st.accepted;
      dt = std::min(step * factor, max_step);
    } else {
      ++st.rejected;
      dt = std::min(step * factor, max_step);
    }
  }
  return st;
}

}  // namespace oracle

#endif  // GAPWFR_TESTS_ORACLES_HPP
