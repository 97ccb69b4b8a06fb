#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapwfr/spike_template.hpp"
#include "gapwfr/waveform.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace gapwfr;

namespace {

template <class F, class DF>
Waveform sample(F f, DF df, double t0, double h, int n) {
  Eigen::VectorXd v(n + 1), d(n + 1);
  for (int u = 0; u <= n; ++u) {
    v[u] = f(t0 + u * h);
    d[u] = df(t0 + u * h);
  }
  return hermite_waveform(t0, h, v, d);
}

}  // namespace

TEST_CASE("Hermite basis values") {
  const auto p0 = hermite_basis(0.0);
  CHECK(p0[0] == 1.0);
  CHECK(p0[1] == 0.0);
  CHECK(p0[2] == 0.0);
  CHECK(p0[3] == 0.0);
  const auto p1 = hermite_basis(1.0);
  CHECK(p1[0] == 0.0);
  CHECK(p1[1] == 1.0);
  CHECK(p1[2] == 0.0);
  CHECK(p1[3] == 0.0);
  const auto ph = hermite_basis(0.5);
  CHECK(ph[0] == doctest::Approx(0.5));
  CHECK(ph[1] == doctest::Approx(0.5));
  CHECK(ph[2] == doctest::Approx(0.125));
  CHECK(ph[3] == doctest::Approx(-0.125));
  for (int k = 0; k <= 100; ++k) {
    const auto p = hermite_basis(k / 100.0);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("evaluation") {
  const auto cube = sample([](double t) { return t * t * t; }, [](double t) { return 3 * t * t; }, 0.0, 1.0, 1);
  CHECK(cube(0.5) == doctest::Approx(0.125).epsilon(1e-15));

  const auto w = sample([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }, 2.0, 0.1, 10);
  for (int u = 0; u <= 10; ++u) {
    CHECK(w(2.0 + u * 0.1) == std::sin(2.0 + u * 0.1));
    // both endpoints of each segment
    if (u < 10) CHECK(w.segment_value(u, 0.0) == std::sin(2.0 + u * 0.1));
    if (u > 0) CHECK(w.segment_value(u - 1, 1.0) == doctest::Approx(std::sin(2.0 + u * 0.1)).epsilon(1e-15));
  }
  try {
    w(3.5);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "evaluation outside iteration interval");
  }
  CHECK_THROWS_AS(w(1.9), ConfigError);

  const auto c = constant_waveform(-65.0, 1.0, 2.0);
  CHECK(c.kind() == WaveformKind::constant);
  CHECK(c(1.0) == -65.0);
  CHECK(c(2.3) == -65.0);
  CHECK(c(3.0) == -65.0);
  CHECK(waveform_max_diff(c, c, 0.1) == 0.0);
}

TEST_CASE("cubic reproduction on random cubics") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), pos(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const auto f = [&](double t) { return ((a * t + b) * t + c) * t + d; };
    const auto df = [&](double t) { return (3 * a * t + 2 * b) * t + c; };
    const auto w = sample(f, df, 0.0, 0.1, 10);
    const double t = pos(rng);
    worst = std::max(worst, std::abs(w(t) - f(t)) / std::max(std::abs(f(t)), 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("interpolation converges with order at least 3.5") {
  const double omega = 2.0 * std::numbers::pi / 5.0;
  const auto f = [&](double t) { return std::sin(omega * t); };
  const auto df = [&](double t) { return omega * std::cos(omega * t); };
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const int n = static_cast<int>(std::lround(5.0 / h));
    const auto w = sample(f, df, 0.0, h, n);
    double e = 0.0;
    for (int k = 0; k <= 5000; ++k) {
      const double t = 5.0 * k / 5000.0;
      e = std::max(e, std::abs(w(t) - f(t)));
    }
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 3.5);
}

TEST_CASE("grid distance") {
  const auto a = constant_waveform(0.0, 0.0, 1.0);
  const auto b = constant_waveform(1.0, 0.0, 1.0);
  CHECK(waveform_max_diff(a, b, 0.1) == 1.0);
  CHECK(waveform_max_diff(a, b, 0.25) == 1.0);

  const auto s = sample([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }, 0.0, 0.1, 10);
  const auto s2 = sample([](double t) { return std::sin(t) + 1e-4 * t; },
                         [](double t) { return std::cos(t) + 1e-4; }, 0.0, 0.1, 10);
  CHECK(std::abs(waveform_max_diff(s, s2, 0.1) - 1e-4) < 1e-12);
  CHECK(waveform_max_diff(s, s, 0.1) == 0.0);

  const auto shifted = constant_waveform(0.0, 0.5, 1.0);
  CHECK_THROWS_AS(waveform_max_diff(a, shifted, 0.1), ConfigError);
}

TEST_CASE("initial guesses") {
  NeuronParams p;
  p.I_ext = 200.0;
  const auto shape = build_spike_template(p, 0.001);

  const auto quiet = initial_guess(-70.0, 0.5, &shape, 0.0, 1.0);
  CHECK(quiet.kind() == WaveformKind::constant);
  CHECK(quiet(0.7) == -70.0);

  const auto none = initial_guess(-30.0, 100.0, nullptr, 0.0, 1.0);
  CHECK(none.kind() == WaveformKind::constant);

  const auto rising = initial_guess(-30.0, 100.0, &shape, 4.0, 0.1);
  CHECK(rising.kind() == WaveformKind::spike_template);
  CHECK(rising(4.0) == doctest::Approx(-30.0).epsilon(1e-9));
  CHECK(rising(4.05) > -30.0);

  const auto falling = initial_guess(-30.0, -100.0, &shape, 4.0, 0.1);
  CHECK(falling.kind() == WaveformKind::spike_template);
  CHECK(falling(4.0) == doctest::Approx(-30.0).epsilon(1e-9));
  CHECK(falling(4.05) < -30.0);
}

TEST_CASE("debug dump") {
  const auto w = sample([](double t) { return t; }, [](double) { return 1.0; }, 0.0, 0.5, 2);
  std::ostringstream os;
  write_waveform_csv(os, w, 0.5, 2);
  const std::string s = os.str();
  CHECK(s.rfind("t,V,dVdt\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 5);
}
