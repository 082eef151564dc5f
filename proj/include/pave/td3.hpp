#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pave/adam.hpp"
#include "pave/network.hpp"
#include "pave/replay.hpp"
#include "pave/rng.hpp"
#include "pave/tape.hpp"

namespace pave {

struct TD3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise = 0.1;
  int batch_size = 256;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  int warmup_steps = 1000;
  size_t buffer_capacity = 200000;
  std::vector<int> hidden = {64, 64};
  bool parallel_update = true;  // OpenMP over batch elements; serial kept for testing

  void validate() const;
};

struct TargetNetworks {
  ActorNetwork actor;
  CriticNetwork critic1, critic2;
};

// Everything an auxiliary critic loss may touch for one batch element. The
// (s, a) leaves are shared with the TD term so every loss lives on one graph.
struct ElementContext {
  Tape& tape;
  const CriticNetwork& critic;
  const Mlp::Bound& bound;
  NodeId s_node = kNoNode;
  NodeId a_node = kNoNode;
  std::span<const double> s, a, s_next;
  size_t element = 0;
};

using AuxBuilder = std::function<NodeId(ElementContext&)>;

struct WeightedAux {
  std::string name;  // run-log column key
  double weight = 0.0;
  AuxBuilder build;
};

// Called once per update with the gathered batch; draws whatever randomness
// the losses need from the dedicated streams and returns the loss builders.
using AuxProvider =
    std::function<std::vector<WeightedAux>(const BatchView&, Rng& perturbation, Rng& rademacher)>;

struct UpdateStats {
  double l_td = 0.0, l_mpr = 0.0, l_vfc = 0.0, l_curv = 0.0, l_total = 0.0;
  long input_grad_evals = 0;  // summed over elements and both critics
  bool skipped = false;       // non-finite loss, optimizer step withheld
  bool actor_updated = false;
};

// Twin-critic deterministic-policy learner. The critic update accepts
// pluggable auxiliary losses; the actor update never changes.
class TD3Agent {
 public:
  TD3Agent(int state_dim, int action_dim, double action_bound, TD3Config cfg, uint64_t master_seed);

  void set_aux_provider(AuxProvider provider) { aux_provider_ = std::move(provider); }

  void select_action(std::span<const double> s, std::span<double> a, bool explore);
  void random_action(std::span<double> a);  // warmup exploration
  void observe(std::span<const double> s, std::span<const double> a, double r,
               std::span<const double> s_next, bool truncated);

  bool ready() const { return replay_.size() >= size_t(cfg_.batch_size); }
  UpdateStats update();

  // y = r + gamma (1 - truncated) min(Q1', Q2')(s', clip(pi'(s') + noise))
  std::vector<double> td_targets(const BatchView& batch);

  static void soft_update(ParamVector& target, const ParamVector& online, double tau);

  const TD3Config& config() const { return cfg_; }
  ActorNetwork& actor() { return actor_; }
  CriticNetwork& critic1() { return critic1_; }
  CriticNetwork& critic2() { return critic2_; }
  TargetNetworks& targets() { return targets_; }
  const ReplayBuffer& replay() const { return replay_; }
  long updates_done() const { return updates_; }

  // Parameter gradient of the mean actor objective on a frozen critic;
  // exposed so tests can assert the actor path ignores auxiliary losses.
  ParamVector actor_gradient(const BatchView& batch);

  void save_checkpoint(const std::string& path, uint64_t step, uint64_t config_hash) const;
  struct CheckpointInfo {
    uint64_t step = 0;
    uint64_t config_hash = 0;
  };
  CheckpointInfo load_checkpoint(const std::string& path);

 private:
  struct CriticResult {
    double td = 0.0;
    std::vector<double> aux_means;
    long grad_evals = 0;
  };
  CriticResult critic_pass(CriticNetwork& critic, const BatchView& batch,
                           std::span<const double> y, const std::vector<WeightedAux>& aux,
                           std::vector<double>& grad_out);

  int k_, d_;
  double bound_;
  TD3Config cfg_;
  ActorNetwork actor_;
  CriticNetwork critic1_, critic2_;
  TargetNetworks targets_;
  Adam opt_actor_, opt_critic1_, opt_critic2_;
  ReplayBuffer replay_;
  Rng rng_explore_, rng_target_, rng_replay_, rng_perturb_, rng_rademacher_;
  AuxProvider aux_provider_;
  long updates_ = 0;
  MlpScratch scratch_;
  std::vector<double> slot_grads_;  // batch-element gradient slots, reduced in index order
};

// Checkpoint contents decoupled from a live agent; evaluation and probing
// rebuild networks straight from this.
struct CheckpointData {
  uint64_t step = 0, config_hash = 0;
  int k = 0, d = 0;
  double bound = 0.0;
  std::vector<int> hidden;
  ParamVector actor, critic1, critic2, actor_target, critic1_target, critic2_target;

  ActorNetwork make_actor() const;
  CriticNetwork make_critic1() const;
  CriticNetwork make_critic2() const;
};

CheckpointData read_checkpoint(const std::string& path);

// TD term alone on one tape (mean squared error of both critics against the
// precomputed targets); used by unit oracles.
NodeId build_td_loss(Tape& t, const CriticNetwork& c1, const Mlp::Bound& b1,
                     const CriticNetwork& c2, const Mlp::Bound& b2, const BatchView& batch,
                     std::span<const double> y);

}  // namespace pave
