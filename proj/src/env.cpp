#include "pave/env.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace pave {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
}  // namespace

double PendulumEnv::wrap_angle(double theta) {
  double x = std::fmod(theta + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  double w = x - kPi;          // [-pi, pi)
  if (w == -kPi) w = kPi;      // keep the convention (-pi, pi]
  return w;
}

std::array<double, 3> PendulumEnv::observe(const PendulumState& s) {
  return {std::cos(s.theta), std::sin(s.theta), s.theta_dot};
}

StepResult PendulumEnv::reset(uint64_t seed) {
  Rng rng = Rng::stream(seed, Stream::kEnv);
  state_.theta = rng.uniform(-kPi, kPi);
  state_.theta_dot = rng.uniform(-1.0, 1.0);
  step_count_ = 0;
  StepResult r;
  r.observation = observe(state_);
  return r;
}

StepResult PendulumEnv::reset_to(const PendulumState& state) {
  state_ = state;
  step_count_ = 0;
  StepResult r;
  r.observation = observe(state_);
  return r;
}

StepResult PendulumEnv::step(double torque) {
  if (!std::isfinite(torque)) throw std::invalid_argument("PendulumEnv: non-finite torque");
  double u = std::clamp(torque, -kMaxTorque, kMaxTorque);

  double theta_ddot = 3.0 * kGravity / (2.0 * kLength) * std::sin(state_.theta) +
                      3.0 / (kMass * kLength * kLength) * u;
  state_.theta_dot = std::clamp(state_.theta_dot + theta_ddot * kDt, -kMaxSpeed, kMaxSpeed);
  state_.theta += state_.theta_dot * kDt;

  double wrapped = wrap_angle(state_.theta);
  double reward = -(wrapped * wrapped + 0.1 * state_.theta_dot * state_.theta_dot + 0.001 * u * u);

  ++step_count_;
  StepResult r;
  r.observation = observe(state_);
  r.reward = reward;
  r.done = false;
  r.truncated = step_count_ >= kEpisodeSteps;
  return r;
}

void noisy_observe(std::span<double> obs, const NoiseWrapperConfig& cfg, Rng& rng) {
  if (cfg.sigma < 0.0) throw std::invalid_argument("noisy_observe: sigma must be nonnegative");
  if (obs.size() != cfg.sigma_base.size()) {
    throw std::invalid_argument("noisy_observe: dimension mismatch");
  }
  if (cfg.sigma == 0.0) return;
  for (size_t i = 0; i < obs.size(); ++i) {
    obs[i] += rng.uniform(-cfg.sigma, cfg.sigma) * cfg.sigma_base[i];
  }
}

std::vector<double> estimate_sigma_base(const std::vector<std::array<double, 3>>& observations) {
  std::vector<double> base(3, 0.0);
  if (observations.empty()) return std::vector<double>(3, 1e-12);
  std::array<double, 3> mean{};
  for (const auto& o : observations) {
    for (int i = 0; i < 3; ++i) mean[size_t(i)] += o[size_t(i)];
  }
  for (int i = 0; i < 3; ++i) mean[size_t(i)] /= double(observations.size());
  for (const auto& o : observations) {
    for (int i = 0; i < 3; ++i) {
      double d = o[size_t(i)] - mean[size_t(i)];
      base[size_t(i)] += d * d;
    }
  }
  for (int i = 0; i < 3; ++i) {
    base[size_t(i)] = std::sqrt(base[size_t(i)] / double(observations.size()));
    base[size_t(i)] = std::max(base[size_t(i)], 1e-12);
  }
  return base;
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  os << std::setprecision(17);
  os << "t,theta,theta_dot,action,reward,obs0,obs1,obs2\n";
  for (const TrajectoryRow& r : rows) {
    os << r.t << ',' << r.theta << ',' << r.theta_dot << ',' << r.action << ',' << r.reward << ','
       << r.obs[0] << ',' << r.obs[1] << ',' << r.obs[2] << "\n";
  }
}

}  // namespace pave
