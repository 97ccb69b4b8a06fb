#ifndef GAPWFR_RK_HPP
#define GAPWFR_RK_HPP

// Embedded explicit Runge-Kutta stepping with adaptive step-size control that
// lands exactly on every point of a fixed communication grid.

#include "gapwfr/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace gapwfr {

inline constexpr int kMaxStages = 8;

template <typename Scalar>
struct ButcherTableau {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::string name;
  Matrix a;      // strictly lower triangular
  Vector b;      // weights of the propagated solution
  Vector b_hat;  // weights of the embedded solution
  Vector c;      // nodes
  int order = 0;          // order of the propagated solution
  int embedded_order = 0; // order of the embedded solution

  int stages() const { return static_cast<int>(b.size()); }

  void validate(Scalar tol = Scalar(1e-12)) const {
    const int s = stages();
    if (s < 1 || s > kMaxStages) throw ConfigError("tableau " + name + ": bad stage count");
    if (a.rows() != s || a.cols() != s || b_hat.size() != s || c.size() != s)
      throw ConfigError("tableau " + name + ": inconsistent dimensions");
    for (int q = 0; q < s; ++q)
      for (int l = q; l < s; ++l)
        if (a(q, l) != Scalar(0)) throw ConfigError("tableau " + name + ": not explicit");
    using std::abs;
    if (abs(b.sum() - Scalar(1)) > tol || abs(b_hat.sum() - Scalar(1)) > tol)
      throw ConfigError("tableau " + name + ": weights not consistent");
    for (int q = 0; q < s; ++q)
      if (abs(a.row(q).sum() - c[q]) > tol)
        throw ConfigError("tableau " + name + ": nodes do not match row sums");
  }

  /// Fehlberg 4(5), propagating the fifth-order solution.
  static ButcherTableau fehlberg45() {
    ButcherTableau t;
    t.name = "fehlberg45";
    t.order = 5;
    t.embedded_order = 4;
    t.a = Matrix::Zero(6, 6);
    t.a(1, 0) = Scalar(1) / 4;
    t.a(2, 0) = Scalar(3) / 32;
    t.a(2, 1) = Scalar(9) / 32;
    t.a(3, 0) = Scalar(1932) / 2197;
    t.a(3, 1) = Scalar(-7200) / 2197;
    t.a(3, 2) = Scalar(7296) / 2197;
    t.a(4, 0) = Scalar(439) / 216;
    t.a(4, 1) = Scalar(-8);
    t.a(4, 2) = Scalar(3680) / 513;
    t.a(4, 3) = Scalar(-845) / 4104;
    t.a(5, 0) = Scalar(-8) / 27;
    t.a(5, 1) = Scalar(2);
    t.a(5, 2) = Scalar(-3544) / 2565;
    t.a(5, 3) = Scalar(1859) / 4104;
    t.a(5, 4) = Scalar(-11) / 40;
    t.b.resize(6);
    t.b << Scalar(16) / 135, 0, Scalar(6656) / 12825, Scalar(28561) / 56430, Scalar(-9) / 50,
        Scalar(2) / 55;
    t.b_hat.resize(6);
    t.b_hat << Scalar(25) / 216, 0, Scalar(1408) / 2565, Scalar(2197) / 4104, Scalar(-1) / 5, 0;
    t.c.resize(6);
    t.c << 0, Scalar(1) / 4, Scalar(3) / 8, Scalar(12) / 13, 1, Scalar(1) / 2;
    return t;
  }

  /// Dormand-Prince 5(4).
  static ButcherTableau dormand_prince54() {
    ButcherTableau t;
    t.name = "dormand_prince54";
    t.order = 5;
    t.embedded_order = 4;
    t.a = Matrix::Zero(7, 7);
    t.a(1, 0) = Scalar(1) / 5;
    t.a(2, 0) = Scalar(3) / 40;
    t.a(2, 1) = Scalar(9) / 40;
    t.a(3, 0) = Scalar(44) / 45;
    t.a(3, 1) = Scalar(-56) / 15;
    t.a(3, 2) = Scalar(32) / 9;
    t.a(4, 0) = Scalar(19372) / 6561;
    t.a(4, 1) = Scalar(-25360) / 2187;
    t.a(4, 2) = Scalar(64448) / 6561;
    t.a(4, 3) = Scalar(-212) / 729;
    t.a(5, 0) = Scalar(9017) / 3168;
    t.a(5, 1) = Scalar(-355) / 33;
    t.a(5, 2) = Scalar(46732) / 5247;
    t.a(5, 3) = Scalar(49) / 176;
    t.a(5, 4) = Scalar(-5103) / 18656;
    t.a(6, 0) = Scalar(35) / 384;
    t.a(6, 2) = Scalar(500) / 1113;
    t.a(6, 3) = Scalar(125) / 192;
    t.a(6, 4) = Scalar(-2187) / 6784;
    t.a(6, 5) = Scalar(11) / 84;
    t.b.resize(7);
    t.b << Scalar(35) / 384, 0, Scalar(500) / 1113, Scalar(125) / 192, Scalar(-2187) / 6784,
        Scalar(11) / 84, 0;
    t.b_hat.resize(7);
    t.b_hat << Scalar(5179) / 57600, 0, Scalar(7571) / 16695, Scalar(393) / 640,
        Scalar(-92097) / 339200, Scalar(187) / 2100, Scalar(1) / 40;
    t.c.resize(7);
    t.c << 0, Scalar(1) / 5, Scalar(3) / 10, Scalar(4) / 5, Scalar(8) / 9, 1, 1;
    return t;
  }

  static ButcherTableau by_name(const std::string& n) {
    if (n == "fehlberg45" || n == "rkf45") return fehlberg45();
    if (n == "dormand_prince54" || n == "dopri5") return dormand_prince54();
    throw ConfigError("unknown tableau '" + n + "'");
  }
};

template <typename Scalar, int Dim>
struct StepResult {
  Eigen::Matrix<Scalar, Dim, 1> y;
  Scalar error = 0;  // weighted max-norm of the embedded difference
  bool finite = true;
};

/// Weighted max-norm with per-component scale max(|y_i|, 1).
template <typename Derived, typename Derived2>
typename Derived::Scalar scaled_max_norm(const Eigen::MatrixBase<Derived>& e,
                                         const Eigen::MatrixBase<Derived2>& y) {
  using Scalar = typename Derived::Scalar;
  return (e.array().abs() / y.array().abs().max(Scalar(1))).maxCoeff();
}

/// One explicit embedded step from (t, y) with step dt.
template <typename Scalar, int Dim, typename Rhs>
StepResult<Scalar, Dim> rk_step(const ButcherTableau<Scalar>& tab, Rhs&& rhs, Scalar t,
                                const Eigen::Matrix<Scalar, Dim, 1>& y, Scalar dt) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  using Stages =
      Eigen::Matrix<Scalar, Dim, Eigen::Dynamic, (Dim == 1 ? Eigen::RowMajor : Eigen::ColMajor),
                    (Dim == Eigen::Dynamic ? Eigen::Dynamic : Dim), kMaxStages>;
  const int s = tab.stages();
  Stages k(y.rows(), s);
  StepResult<Scalar, Dim> out;
  for (int q = 0; q < s; ++q) {
    State stage = y;
    for (int l = 0; l < q; ++l) {
      const Scalar a = tab.a(q, l);
      if (a != Scalar(0)) stage.noalias() += (dt * a) * k.col(l);
    }
    if (stage.allFinite()) k.col(q) = rhs(t + tab.c[q] * dt, stage);
    if (!stage.allFinite() || !k.col(q).allFinite()) {
      out.y = y;
      out.error = std::numeric_limits<Scalar>::infinity();
      out.finite = false;
      return out;
    }
  }
  out.y = y + dt * (k * tab.b);
  const State diff = dt * (k * (tab.b - tab.b_hat));
  out.error = scaled_max_norm(diff, y);
  out.finite = out.y.allFinite();
  if (!out.finite) out.error = std::numeric_limits<Scalar>::infinity();
  return out;
}

template <typename Scalar>
struct StepController {
  Scalar tolerance = Scalar(1e-6);
  Scalar safety = Scalar(0.9);
  Scalar growth_cap = Scalar(5);
  Scalar shrink_floor = Scalar(0.2);
  Scalar min_step = Scalar(1e-10);
  Scalar max_step = Scalar(0.1);
  Scalar dt = Scalar(0.1);
  int embedded_order = 4;

  void validate() const {
    if (!(tolerance > 0)) throw ConfigError("solver tolerance must be positive");
    if (!(min_step > 0 && min_step <= max_step)) throw ConfigError("invalid step bounds");
  }
};

template <typename Scalar>
struct AdaptResult {
  bool accept = false;
  Scalar dt_next = 0;
};

/// Accept iff error <= tolerance; next step from the standard embedded-order
/// update, clamped to [min_step, max_step].
template <typename Scalar>
AdaptResult<Scalar> adapt_step(const StepController<Scalar>& ctrl, Scalar error, Scalar dt) {
  using std::pow;
  AdaptResult<Scalar> r;
  r.accept = error <= ctrl.tolerance;
  Scalar factor;
  if (error == Scalar(0)) {
    factor = ctrl.growth_cap;
  } else if (!std::isfinite(static_cast<double>(error))) {
    factor = ctrl.shrink_floor;
  } else {
    factor = ctrl.safety * pow(ctrl.tolerance / error, Scalar(1) / (ctrl.embedded_order + 1));
    factor = std::clamp(factor, ctrl.shrink_floor, ctrl.growth_cap);
  }
  if (!r.accept && dt <= ctrl.min_step) throw SolverError("step size underflow");
  r.dt_next = std::clamp(dt * factor, ctrl.min_step, ctrl.max_step);
  return r;
}

/// States and right-hand sides at every grid point t0 + u*h, u = 0..n.
template <typename Scalar, int Dim>
struct GridSolution {
  using Columns = Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>;
  Scalar t0 = 0;
  Scalar h = 0;
  Columns values;
  Columns derivatives;
  long accepted_steps = 0;
  long rejected_steps = 0;
  Scalar final_dt = 0;

  int intervals() const { return static_cast<int>(values.cols()) - 1; }
  Scalar time(int u) const { return t0 + u * h; }
};

template <typename Scalar, int Dim>
struct IntervalHooks {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  // Invoked at grid point u (u < n) before leaving it; may apply jumps.
  std::function<void(int, State&)> at_grid;
  // Applied to every accepted step endpoint.
  std::function<void(State&)> project;
  std::vector<Scalar>* accepted_times = nullptr;
};

/// Number of h-steps in T; throws unless T is a positive integer multiple of h.
template <typename Scalar>
int grid_steps(Scalar T, Scalar h) {
  using std::abs;
  using std::round;
  if (!(h > 0) || !(T > 0)) throw ConfigError("interval and grid step must be positive");
  const Scalar r = T / h;
  const Scalar n = round(r);
  if (n < 1 || abs(r - n) > Scalar(1e-9) * std::max(Scalar(1), r))
    throw ConfigError("interval length must be an integer multiple of h");
  return static_cast<int>(n);
}

/// Adaptive integration over [t0, t0 + n*h]. Steps that would overshoot the
/// next grid point are truncated so every grid point is an accepted endpoint.
/// `ctrl.dt` is used as the initial proposal and updated on return.
template <typename Scalar, int Dim, typename Rhs>
GridSolution<Scalar, Dim> integrate_grid(const ButcherTableau<Scalar>& tab,
                                         StepController<Scalar>& ctrl, Rhs&& rhs,
                                         const Eigen::Matrix<Scalar, Dim, 1>& y0, Scalar t0,
                                         int n, Scalar h,
                                         const IntervalHooks<Scalar, Dim>& hooks = {}) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  if (n < 1) throw ConfigError("at least one grid step required");
  if (!y0.allFinite()) throw SolverError("non-finite initial state");
  ctrl.validate();
  StepController<Scalar> c = ctrl;
  c.max_step = std::min(c.max_step, h);
  c.min_step = std::min(c.min_step, c.max_step);
  c.embedded_order = tab.embedded_order;

  GridSolution<Scalar, Dim> sol;
  sol.t0 = t0;
  sol.h = h;
  sol.values.resize(y0.rows(), n + 1);
  sol.derivatives.resize(y0.rows(), n + 1);

  State y = y0;
  Scalar dt = std::clamp(ctrl.dt, c.min_step, c.max_step);
  // position inside the current h-segment; keeps step sequences independent of t0 and n
  for (int u = 0; u < n; ++u) {
    const Scalar left = t0 + u * h;
    if (hooks.at_grid) hooks.at_grid(u, y);
    sol.values.col(u) = y;
    sol.derivatives.col(u) = rhs(left, y);
    Scalar tau = 0;
    for (;;) {
      const Scalar remaining = h - tau;
      const bool last = remaining <= dt * Scalar(1.001);
      const Scalar step = last ? remaining : dt;
      const auto res = rk_step(tab, rhs, left + tau, y, step);
      const auto adapt = adapt_step(c, res.error, step);
      if (adapt.accept && res.finite) {
        y = res.y;
        if (hooks.project) hooks.project(y);
        ++sol.accepted_steps;
        if (last) {
          // a truncated step says little about the admissible step size
          dt = std::max(dt, adapt.dt_next);
          if (hooks.accepted_times) hooks.accepted_times->push_back(t0 + (u + 1) * h);
          break;
        }
        tau += step;
        dt = adapt.dt_next;
        if (hooks.accepted_times) hooks.accepted_times->push_back(left + tau);
      } else {
        ++sol.rejected_steps;
        dt = std::min(adapt.dt_next, step * ctrl.safety);
        if (dt < c.min_step) throw SolverError("step size underflow");
      }
    }
  }
  sol.values.col(n) = y;
  sol.derivatives.col(n) = rhs(t0 + n * h, y);
  sol.final_dt = dt;
  ctrl.dt = dt;
  return sol;
}

/// integrate_grid over an iteration interval of length T.
template <typename Scalar, int Dim, typename Rhs>
GridSolution<Scalar, Dim> integrate_interval(const ButcherTableau<Scalar>& tab,
                                             StepController<Scalar>& ctrl, Rhs&& rhs,
                                             const Eigen::Matrix<Scalar, Dim, 1>& y0, Scalar t0,
                                             Scalar T, Scalar h,
                                             const IntervalHooks<Scalar, Dim>& hooks = {}) {
  return integrate_grid(tab, ctrl, std::forward<Rhs>(rhs), y0, t0, grid_steps(T, h), h, hooks);
}

/// Fixed-step propagation with the tableau's b weights (no error control).
template <typename Scalar, int Dim, typename Rhs>
Eigen::Matrix<Scalar, Dim, 1> integrate_fixed(const ButcherTableau<Scalar>& tab, Rhs&& rhs,
                                              Eigen::Matrix<Scalar, Dim, 1> y, Scalar t0,
                                              Scalar dt, long steps) {
  for (long k = 0; k < steps; ++k) {
    y = rk_step(tab, rhs, t0 + k * dt, y, dt).y;
  }
  return y;
}

}  // namespace gapwfr

#endif  // GAPWFR_RK_HPP
