#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pave/config.hpp"
#include "pave/env.hpp"
#include "pave/geometry.hpp"
#include "pave/metrics.hpp"
#include "pave/regularizers.hpp"
#include "pave/td3.hpp"

namespace pave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

struct SeedRunResult {
  uint64_t seed = 0;
  std::string run_dir;
  std::string final_checkpoint;
  bool aborted = false;  // non-finite loss streak exceeded
  double last_episode_return = 0.0;
};

// One full training run (the outer environment loop plus per-step critic and
// delayed actor updates), with run-log, checkpoints and a config snapshot
// written under <out_dir>/run_seed<seed>/.
SeedRunResult train_one_seed(const ExperimentConfig& cfg, uint64_t seed);

struct EvalSummary {
  std::vector<double> returns;     // per episode
  std::vector<double> smoothness;  // per episode, aggregate score
  double mean_return = 0.0, std_return = 0.0;
  double mean_smoothness = 0.0, std_smoothness = 0.0;
};

// Ten clean greedy episodes with the policy; the per-dimension standard
// deviation of everything it saw.
std::vector<double> estimate_policy_sigma_base(const ActorNetwork& actor, uint64_t eval_seed);

EvalSummary evaluate_policy(const ActorNetwork& actor, int episodes, double noise_sigma,
                            std::span<const double> sigma_base, uint64_t eval_seed,
                            const std::string& trajectory_csv = "");

void write_metrics_csv(const std::string& path, uint64_t seed, const EvalSummary& summary);

// Greedy reference transition for landscape probes: the first state-action
// pair of a stored evaluation trajectory.
struct ReferencePoint {
  std::vector<double> s, a;
};
ReferencePoint greedy_reference(const ActorNetwork& actor, uint64_t eval_seed);

// Quadratic critic spec file: k, d, c plus comma-separated row-major blocks.
QuadraticCritic parse_quadratic_file(const std::string& path);

struct CliArgs {
  std::string command;
  std::optional<std::string> config_file;
  std::vector<std::pair<std::string, std::string>> overrides;  // config-key flags
  std::optional<std::string> checkpoint;
  std::optional<std::string> quadratic;
  std::string out_dir;
  std::vector<double> noise_sigmas{0.0};
  int episodes = 10;
  uint64_t eval_seed = 0;
  std::string sweep_param;
  std::vector<double> sweep_values;
  bool dump_trajectory = false;
  int grid_n = 41;
  double clip = 300.0;
  double fd_eps = 1e-3;
};

int cmd_train(const ExperimentConfig& cfg);
int cmd_eval(const CliArgs& args);
int cmd_probe(const CliArgs& args);
int cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir);
int cmd_ablate(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_selftest();

// Shared by the command-line front end and the tests.
int run_cli(int argc, const char* const* argv);

}  // namespace pave
