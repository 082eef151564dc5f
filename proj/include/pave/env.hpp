#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "pave/rng.hpp"

namespace pave {

struct PendulumState {
  double theta = 0.0;      // radians, 0 = upright
  double theta_dot = 0.0;  // radians / second
};

struct StepResult {
  std::array<double, 3> observation{};  // cos(theta), sin(theta), theta_dot
  double reward = 0.0;
  bool done = false;       // never set by this environment
  bool truncated = false;  // time-limit only
};

// Torque-limited pendulum swing-up. Semi-implicit Euler at dt = 0.05 with the
// angular rate updated before the angle; the rate is clamped to +-8 and the
// episode truncates after 200 steps.
class PendulumEnv {
 public:
  static constexpr int kObsDim = 3;
  static constexpr int kActDim = 1;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kDt = 0.05;
  static constexpr int kEpisodeSteps = 200;

  StepResult reset(uint64_t seed);
  StepResult reset_to(const PendulumState& state);
  StepResult step(double torque);

  const PendulumState& state() const { return state_; }
  int steps_taken() const { return step_count_; }

  static std::array<double, 3> observe(const PendulumState& s);
  static double wrap_angle(double theta);  // into (-pi, pi]

 private:
  PendulumState state_;
  int step_count_ = 0;
};

struct NoiseWrapperConfig {
  double sigma = 0.0;              // dimensionless noise level, >= 0
  std::vector<double> sigma_base;  // per-dimension observation scale, > 0
};

// Adds uniform noise scaled per dimension: obs_i + U(-sigma, sigma) * base_i.
void noisy_observe(std::span<double> obs, const NoiseWrapperConfig& cfg, Rng& rng);

// Per-dimension standard deviation over a set of observations; entries are
// floored at a tiny positive value so the wrapper invariant holds.
std::vector<double> estimate_sigma_base(const std::vector<std::array<double, 3>>& observations);

struct TrajectoryRow {
  int t;
  double theta, theta_dot, action, reward;
  std::array<double, 3> obs;
};

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows);

}  // namespace pave
