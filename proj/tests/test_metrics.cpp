#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pave/metrics.hpp"
#include "pave/rng.hpp"

using namespace pave;

namespace {

// quadratic-time reference transform
std::vector<std::complex<double>> dft_bruteforce(std::span<const double> x) {
  size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double two_pi = 6.283185307179586476925286766559;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      double ang = -two_pi * double(k) * double(t) / double(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fft of an impulse is flat") {
  std::vector<double> x{1.0, 0.0, 0.0, 0.0};
  auto spec = fft_real(x);
  REQUIRE(spec.size() == 4);
  for (const auto& c : spec) {
    CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::fabs(c.imag()) < 1e-15);
  }
}

TEST_CASE("fft of a constant is a pure DC bin") {
  std::vector<double> x{2.5, 2.5, 2.5, 2.5};
  auto spec = fft_real(x);
  CHECK(spec[0].real() == doctest::Approx(10.0).epsilon(1e-15));
  for (size_t i = 1; i < spec.size(); ++i) CHECK(std::abs(spec[i]) < 1e-12);
}

TEST_CASE("fft rejects empty input") {
  std::vector<double> x;
  CHECK_THROWS_AS(fft_real(x), std::invalid_argument);
}

TEST_CASE("fft matches the brute-force transform on random inputs") {
  Rng rng(64);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> x(64);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    auto fast = fft_real(x);
    auto slow = dft_bruteforce(x);
    REQUIRE(fast.size() == slow.size());
    for (size_t i = 0; i < fast.size(); ++i) {
      CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
    }
  }
}

TEST_CASE("fft pads non-power-of-two lengths") {
  std::vector<double> x(100, 0.0);
  x[0] = 1.0;
  auto spec = fft_real(x);
  CHECK(spec.size() == 128);
}

TEST_CASE("parseval identity holds") {
  Rng rng(7);
  std::vector<double> x(128);
  for (double& v : x) v = rng.normal();
  auto spec = fft_real(x);
  double time_energy = 0.0;
  for (double v : x) time_energy += v * v;
  double freq_energy = 0.0;
  for (const auto& c : spec) freq_energy += std::norm(c);
  freq_energy /= double(spec.size());
  CHECK(std::fabs(time_energy - freq_energy) / time_energy < 1e-9);
}

TEST_CASE("constant traces score exactly zero") {
  ActionTrace trace;
  trace.dt = 0.05;
  trace.series = {std::vector<double>(200, 1.37)};
  SmoothnessReport rep = smoothness_score(trace);
  CHECK(rep.per_dim[0] == 0.0);
  CHECK(rep.aggregate == 0.0);
}

TEST_CASE("doubling the frequency doubles the score") {
  // bin-aligned sinusoids: n = 256 samples at 20 Hz, bins 16 and 32
  const size_t n = 256;
  const double fs = 20.0;
  ActionTrace t1, t2;
  t1.dt = t2.dt = 1.0 / fs;
  std::vector<double> a(n), b(n);
  const double two_pi = 6.283185307179586476925286766559;
  for (size_t i = 0; i < n; ++i) {
    a[i] = std::sin(two_pi * 16.0 * double(i) / double(n));
    b[i] = std::sin(two_pi * 32.0 * double(i) / double(n));
  }
  t1.series = {a};
  t2.series = {b};
  double s1 = smoothness_score(t1).aggregate;
  double s2 = smoothness_score(t2).aggregate;
  CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("high-frequency dither strictly raises the score") {
  const size_t n = 200;
  ActionTrace smooth, dithered;
  smooth.dt = dithered.dt = 0.05;
  std::vector<double> base(n), noisy(n);
  for (size_t i = 0; i < n; ++i) {
    base[i] = std::sin(0.05 * double(i));
    noisy[i] = base[i] + 0.2 * ((i % 2 == 0) ? 1.0 : -1.0);
  }
  smooth.series = {base};
  dithered.series = {noisy};
  CHECK(smoothness_score(dithered).aggregate > smoothness_score(smooth).aggregate);
}

TEST_CASE("score scales exactly with the trace amplitude") {
  Rng rng(15);
  std::vector<double> x(150);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  ActionTrace t1, t2;
  t1.dt = t2.dt = 0.05;
  t1.series = {x};
  std::vector<double> doubled(x);
  for (double& v : doubled) v *= 2.0;  // power of two: exact at the formula level
  t2.series = {doubled};
  CHECK(smoothness_score(t2).aggregate == 2.0 * smoothness_score(t1).aggregate);
}

TEST_CASE("score is invariant to constant offsets") {
  Rng rng(16);
  std::vector<double> x(150);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  ActionTrace t1, t2;
  t1.dt = t2.dt = 0.05;
  t1.series = {x};
  std::vector<double> shifted(x);
  for (double& v : shifted) v += 13.7;
  t2.series = {shifted};
  CHECK(smoothness_score(t2).aggregate ==
        doctest::Approx(smoothness_score(t1).aggregate).epsilon(1e-10));
}

TEST_CASE("non-finite samples are rejected") {
  ActionTrace t;
  t.dt = 0.05;
  t.series = {{0.0, std::nan(""), 1.0}};
  CHECK_THROWS_AS(smoothness_score(t), std::invalid_argument);
}

TEST_CASE("traces shorter than two samples are rejected") {
  ActionTrace t;
  t.dt = 0.05;
  t.series = {{1.0}};
  CHECK_THROWS_AS(smoothness_score(t), std::invalid_argument);
}

TEST_CASE("cumulative return sums rewards") {
  std::vector<double> zero(10, 0.0);
  CHECK(cumulative_return(zero) == 0.0);
  std::vector<double> r{1.0, 2.0, 3.0};
  CHECK(cumulative_return(r) == 6.0);
}
