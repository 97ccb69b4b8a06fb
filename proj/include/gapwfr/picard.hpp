#ifndef GAPWFR_PICARD_HPP
#define GAPWFR_PICARD_HPP

// Picard-Lindeloef waveform iteration for small linear test systems
// y' = A y + b: every iteration integrates y^(m)' = A z^(m-1)(t) + b where
// z^(m-1) are Hermite waveforms of all state components of the previous
// iteration. Used to observe superlinear convergence; not for neuron networks.

#include "gapwfr/rk.hpp"
#include "gapwfr/waveform.hpp"

#include <Eigen/Core>

#include <vector>

namespace gapwfr {

template <typename Scalar, int Dim>
std::vector<GridSolution<Scalar, Dim>> picard_iterate(
    const Eigen::Matrix<Scalar, Dim, Dim>& A, const Eigen::Matrix<Scalar, Dim, 1>& b,
    const Eigen::Matrix<Scalar, Dim, 1>& y0, Scalar t0, Scalar T, Scalar h, int iterations,
    const ButcherTableau<Scalar>& tableau, StepController<Scalar> ctrl) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  const int steps = grid_steps(T, h);
  const auto dim = y0.rows();

  std::vector<BasicWaveform<Scalar>> z;
  for (Eigen::Index r = 0; r < dim; ++r) z.push_back(constant_waveform(y0[r], t0, T));

  std::vector<GridSolution<Scalar, Dim>> out;
  out.reserve(static_cast<std::size_t>(iterations));
  for (int m = 1; m <= iterations; ++m) {
    const auto rhs = [&](Scalar t, const State&) {
      State zt(dim);
      for (Eigen::Index r = 0; r < dim; ++r) zt[r] = z[static_cast<std::size_t>(r)](t);
      return State(A * zt + b);
    };
    StepController<Scalar> c = ctrl;
    out.push_back(integrate_grid(tableau, c, rhs, y0, t0, steps, h));
    const auto& grid = out.back();
    for (Eigen::Index r = 0; r < dim; ++r)
      z[static_cast<std::size_t>(r)] =
          hermite_waveform(t0, h, grid.values.row(r), grid.derivatives.row(r));
  }
  return out;
}

}  // namespace gapwfr

#endif  // GAPWFR_PICARD_HPP
