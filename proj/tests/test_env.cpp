#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pave/env.hpp"

using namespace pave;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("reset is deterministic in the seed") {
  PendulumEnv e1, e2;
  StepResult r1 = e1.reset(42), r2 = e2.reset(42);
  CHECK(r1.observation == r2.observation);
  StepResult r3 = e1.reset(43);
  CHECK(r1.observation != r3.observation);
}

TEST_CASE("reset angle distribution is centered") {
  PendulumEnv env;
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    env.reset(uint64_t(i));
    sum += env.state().theta;
  }
  double mean = sum / n;
  // theta ~ U(-pi, pi): sd = 2 pi / sqrt(12), three standard errors of zero
  double se = (2.0 * kPi / std::sqrt(12.0)) / std::sqrt(double(n));
  CHECK(std::fabs(mean) < 3.0 * se);
}

TEST_CASE("observation angle components stay on the unit circle") {
  PendulumEnv env;
  StepResult r = env.reset(7);
  for (int i = 0; i < 300; ++i) {
    double c = r.observation[0], s = r.observation[1];
    CHECK(std::fabs(c * c + s * s - 1.0) < 1e-9);
    r = env.step(std::sin(0.1 * i) * 2.0);
    if (r.truncated) r = env.reset(uint64_t(100 + i));
  }
}

TEST_CASE("hanging rest state is a fixed point with reward -pi^2") {
  PendulumEnv env;
  env.reset_to({kPi, 0.0});
  StepResult r = env.step(0.0);
  CHECK(env.state().theta == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(r.reward == doctest::Approx(-kPi * kPi).epsilon(1e-12));
}

TEST_CASE("upright rest state stays upright with zero reward") {
  PendulumEnv env;
  env.reset_to({0.0, 0.0});
  StepResult r = env.step(0.0);
  CHECK(env.state().theta == 0.0);
  CHECK(r.reward == 0.0);
}

TEST_CASE("one step from horizontal matches the hand-evaluated dynamics") {
  // theta_ddot = (3 g / 2 l) sin(pi/2) = 15, so theta_dot = 15 * 0.05 = 0.75
  PendulumEnv env;
  env.reset_to({kPi / 2.0, 0.0});
  env.step(0.0);
  CHECK(env.state().theta_dot == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(env.state().theta == doctest::Approx(kPi / 2.0 + 0.75 * 0.05).epsilon(1e-12));
}

TEST_CASE("non-finite torque is rejected") {
  PendulumEnv env;
  env.reset(1);
  CHECK_THROWS_AS(env.step(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(env.step(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("speed stays clamped and episodes truncate at 200 steps") {
  PendulumEnv env;
  StepResult r = env.reset(3);
  int steps = 0;
  while (!r.truncated) {
    r = env.step(2.0);
    ++steps;
    CHECK(std::fabs(env.state().theta_dot) <= 8.0);
    CHECK(r.done == false);
  }
  CHECK(steps == 200);
}

TEST_CASE("free swing approximately conserves mechanical energy") {
  // libration well inside the speed limit; energy = (m l^2 / 6) w^2 + (m g l / 2) cos(theta)
  auto energy = [](const PendulumState& s) {
    return s.theta_dot * s.theta_dot / 6.0 + 5.0 * std::cos(s.theta);
  };
  PendulumEnv env;
  env.reset_to({2.8, 0.0});
  double e0 = energy(env.state());
  double max_dev = 0.0;
  for (int i = 0; i < 200; ++i) {
    env.step(0.0);
    CHECK(std::fabs(env.state().theta_dot) < 8.0);  // no clamping active
    max_dev = std::max(max_dev, std::fabs(energy(env.state()) - e0));
  }
  CHECK(max_dev / std::fabs(e0) < 0.02);
}

TEST_CASE("identical seeds and actions give identical trajectories") {
  for (int run = 0; run < 1; ++run) {
    PendulumEnv e1, e2;
    e1.reset(11);
    e2.reset(11);
    Rng actions(5);
    for (int i = 0; i < 200; ++i) {
      double u = actions.uniform(-2.0, 2.0);
      StepResult r1 = e1.step(u);
      StepResult r2 = e2.step(u);
      CHECK(r1.observation == r2.observation);
      CHECK(r1.reward == r2.reward);
    }
  }
}

TEST_CASE("zero noise level leaves observations unchanged") {
  NoiseWrapperConfig cfg;
  cfg.sigma = 0.0;
  cfg.sigma_base = {1.0, 1.0, 1.0};
  Rng rng(9);
  std::vector<double> obs{0.1, -0.5, 2.0};
  std::vector<double> orig = obs;
  noisy_observe(obs, cfg, rng);
  CHECK(obs == orig);
}

TEST_CASE("noise variance matches the uniform moment") {
  NoiseWrapperConfig cfg;
  cfg.sigma = 0.1;
  cfg.sigma_base = {1.0};
  Rng rng(123);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> obs{0.0};
    noisy_observe(obs, cfg, rng);
    sum += obs[0];
    sum2 += obs[0] * obs[0];
  }
  double var = sum2 / n - (sum / n) * (sum / n);
  double expect = cfg.sigma * cfg.sigma / 3.0;
  // Var(d^2) = 4 sigma^4 / 45 for d ~ U(-sigma, sigma)
  double se = std::sqrt(4.0 * std::pow(cfg.sigma, 4) / 45.0 / n);
  CHECK(std::fabs(var - expect) < 3.0 * se);
}

TEST_CASE("noise is bounded by sigma times the per-dimension scale") {
  NoiseWrapperConfig cfg;
  cfg.sigma = 0.2;
  cfg.sigma_base = {1.0, 0.5, 3.0};
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> obs{0.0, 0.0, 0.0};
    noisy_observe(obs, cfg, rng);
    for (size_t j = 0; j < obs.size(); ++j) {
      CHECK(std::fabs(obs[j]) <= cfg.sigma * cfg.sigma_base[j]);
    }
  }
}

TEST_CASE("sigma base estimation is a per-dimension standard deviation") {
  std::vector<std::array<double, 3>> obs = {{1.0, 0.0, -2.0}, {3.0, 0.0, 2.0}};
  std::vector<double> base = estimate_sigma_base(obs);
  CHECK(base[0] == doctest::Approx(1.0).epsilon(1e-12));   // sd of {1, 3}
  CHECK(base[1] == doctest::Approx(1e-12));                // floored positive
  CHECK(base[2] == doctest::Approx(2.0).epsilon(1e-12));   // sd of {-2, 2}
  for (double b : base) CHECK(b > 0.0);
}
