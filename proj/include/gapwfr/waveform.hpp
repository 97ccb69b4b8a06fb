#ifndef GAPWFR_WAVEFORM_HPP
#define GAPWFR_WAVEFORM_HPP

// Dense output exchanged between subsystems: cubic Hermite segments on the
// h-grid, constant guesses and sampled spike-shape guesses.

#include "gapwfr/model.hpp"
#include "gapwfr/rk.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace gapwfr {

/// (p1, p2, p3, p4) of the cubic Hermite basis at theta in [0, 1].
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> hermite_basis(Scalar theta) {
  const Scalar t2 = theta * theta;
  const Scalar t3 = t2 * theta;
  Eigen::Matrix<Scalar, 4, 1> p;
  p << 1 - 3 * t2 + 2 * t3, 3 * t2 - 2 * t3, theta - 2 * t2 + t3, -t2 + t3;
  return p;
}

/// d/dtheta of hermite_basis.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> hermite_basis_derivative(Scalar theta) {
  const Scalar t2 = theta * theta;
  Eigen::Matrix<Scalar, 4, 1> d;
  d << -6 * theta + 6 * t2, 6 * theta - 6 * t2, 1 - 4 * theta + 3 * t2, -2 * theta + 3 * t2;
  return d;
}

enum class WaveformKind { hermite, constant, spike_template };

std::string to_string(WaveformKind kind);

template <typename Scalar>
class BasicWaveform {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  /// One row per grid point: (value, derivative). Adjacent segments share rows.
  using Nodes = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

  BasicWaveform() = default;

  static BasicWaveform hermite(Scalar t0, Scalar h, Nodes nodes) {
    if (nodes.rows() < 2) throw ConfigError("hermite waveform needs at least one segment");
    if (!(h > 0)) throw ConfigError("grid step must be positive");
    if (!nodes.allFinite()) throw SolverError("non-finite waveform coefficients");
    BasicWaveform w;
    w.kind_ = WaveformKind::hermite;
    w.t0_ = t0;
    w.h_ = h;
    w.length_ = h * static_cast<Scalar>(nodes.rows() - 1);
    w.nodes_ = std::move(nodes);
    return w;
  }

  static BasicWaveform constant(Scalar value, Scalar t0, Scalar T) {
    if (!(T > 0)) throw ConfigError("waveform length must be positive");
    BasicWaveform w;
    w.kind_ = WaveformKind::constant;
    w.t0_ = t0;
    w.length_ = T;
    w.value_ = value;
    return w;
  }

  /// Trajectory sampled every `sample_step` from t0; held at the last sample.
  static BasicWaveform sampled(Scalar t0, Scalar T, Vector samples, Scalar sample_step) {
    if (!(T > 0) || !(sample_step > 0) || samples.size() < 1)
      throw ConfigError("invalid sampled waveform");
    BasicWaveform w;
    w.kind_ = WaveformKind::spike_template;
    w.t0_ = t0;
    w.length_ = T;
    w.samples_ = std::move(samples);
    w.sample_step_ = sample_step;
    w.value_ = w.samples_[0];
    return w;
  }

  WaveformKind kind() const { return kind_; }
  Scalar t0() const { return t0_; }
  Scalar length() const { return length_; }
  Scalar t_end() const { return t0_ + length_; }
  Scalar h() const { return h_; }
  int segments() const { return static_cast<int>(nodes_.rows()) - 1; }
  const Nodes& nodes() const { return nodes_; }
  const Vector& samples() const { return samples_; }
  Scalar sample_step() const { return sample_step_; }

  bool covers(Scalar t) const {
    const Scalar eps = Scalar(1e-9) * std::max(Scalar(1), length_);
    return t >= t0_ - eps && t <= t0_ + length_ + eps;
  }

  Scalar operator()(Scalar t) const {
    if (!covers(t)) throw ConfigError("evaluation outside iteration interval");
    switch (kind_) {
      case WaveformKind::constant:
        return value_;
      case WaveformKind::spike_template:
        return sample_at(t);
      case WaveformKind::hermite:
        break;
    }
    using std::abs;
    using std::floor;
    using std::round;
    const Scalar x = (t - t0_) / h_;
    const Scalar xr = round(x);
    const int n = segments();
    if (abs(x - xr) < Scalar(1e-12)) {
      const int u = std::clamp(static_cast<int>(xr), 0, n);
      return nodes_(u, 0);
    }
    const int u = std::clamp(static_cast<int>(floor(x)), 0, n - 1);
    return segment_value(u, x - Scalar(u));
  }

  /// Hermite evaluation within segment u at local coordinate theta.
  Scalar segment_value(int u, Scalar theta) const {
    const auto p = hermite_basis(theta);
    return nodes_(u, 0) * p[0] + nodes_(u + 1, 0) * p[1] +
           h_ * (nodes_(u, 1) * p[2] + nodes_(u + 1, 1) * p[3]);
  }

  /// Time derivative (exact for hermite and constant, finite difference for samples).
  Scalar derivative(Scalar t) const {
    if (!covers(t)) throw ConfigError("evaluation outside iteration interval");
    switch (kind_) {
      case WaveformKind::constant:
        return Scalar(0);
      case WaveformKind::spike_template: {
        const Scalar k = std::clamp((t - t0_) / sample_step_, Scalar(0),
                                    static_cast<Scalar>(samples_.size() - 1));
        const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), samples_.size() - 2);
        if (samples_.size() < 2 || i < 0) return Scalar(0);
        return (samples_[i + 1] - samples_[i]) / sample_step_;
      }
      case WaveformKind::hermite:
        break;
    }
    using std::floor;
    const Scalar x = (t - t0_) / h_;
    const int u = std::clamp(static_cast<int>(floor(x)), 0, segments() - 1);
    const auto d = hermite_basis_derivative(x - Scalar(u));
    return (nodes_(u, 0) * d[0] + nodes_(u + 1, 0) * d[1]) / h_ + nodes_(u, 1) * d[2] +
           nodes_(u + 1, 1) * d[3];
  }

 private:
  Scalar sample_at(Scalar t) const {
    using std::floor;
    const Scalar k = (t - t0_) / sample_step_;
    const auto last = samples_.size() - 1;
    if (k <= 0) return samples_[0];
    if (k >= static_cast<Scalar>(last)) return samples_[last];
    const auto i = static_cast<Eigen::Index>(floor(k));
    const Scalar w = k - static_cast<Scalar>(i);
    return samples_[i] + w * (samples_[i + 1] - samples_[i]);
  }

  WaveformKind kind_ = WaveformKind::constant;
  Scalar t0_ = 0;
  Scalar length_ = 0;
  Scalar h_ = 0;
  Scalar value_ = 0;
  Nodes nodes_;
  Vector samples_;
  Scalar sample_step_ = 0;
};

using Waveform = BasicWaveform<double>;

/// Hermite waveform from grid values and their time derivatives.
template <typename Scalar, typename Values, typename Derivatives>
BasicWaveform<Scalar> hermite_waveform(Scalar t0, Scalar h, const Eigen::MatrixBase<Values>& v,
                                       const Eigen::MatrixBase<Derivatives>& dv) {
  typename BasicWaveform<Scalar>::Nodes nodes(v.size(), 2);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    nodes(i, 0) = v(i);
    nodes(i, 1) = dv(i);
  }
  return BasicWaveform<Scalar>::hermite(t0, h, std::move(nodes));
}

template <typename Scalar>
BasicWaveform<Scalar> constant_waveform(Scalar y0, Scalar t0, Scalar T) {
  return BasicWaveform<Scalar>::constant(y0, t0, T);
}

/// Maximum of |a - b| over the grid points t0 + u*h, u = 1..T/h.
template <typename Scalar>
Scalar waveform_max_diff(const BasicWaveform<Scalar>& a, const BasicWaveform<Scalar>& b,
                         Scalar h) {
  using std::abs;
  const Scalar eps = Scalar(1e-9) * std::max(Scalar(1), a.length());
  if (abs(a.t0() - b.t0()) > eps || abs(a.length() - b.length()) > eps)
    throw ConfigError("waveforms cover different intervals");
  const int n = grid_steps(a.length(), h);
  Scalar worst = 0;
  for (int u = 1; u <= n; ++u) {
    const Scalar t = a.t0() + u * h;
    worst = std::max(worst, abs(a(t) - b(t)));
  }
  return worst;
}

struct SpikeShapeTemplate;

/// Initial guess for one iteration interval: constant below V_spike (or when no
/// template is supplied), otherwise the spike-shape extrapolation from (V, dV/dt).
Waveform initial_guess(double V, double dVdt, const SpikeShapeTemplate* shape, double t0,
                       double T);

/// Debug dump: t, V, dV/dt at `per_segment` samples per grid interval.
void write_waveform_csv(std::ostream& os, const Waveform& w, double h, int per_segment = 10);

}  // namespace gapwfr

#endif  // GAPWFR_WAVEFORM_HPP
