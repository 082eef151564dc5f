#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pave/regularizers.hpp"
#include "pave/td3.hpp"

namespace pave {

// Flat key-value experiment configuration with dotted section names. Every
// number the training loop consumes lives here; command-line flags mirror the
// keys one to one.
struct ExperimentConfig {
  // env.*
  double env_train_noise_sigma = 0.0;  // observation noise during training, off by default

  // td3.*
  TD3Config td3;

  // pave.*
  PaveHyperParams pave;

  // run.*
  long total_steps = 30000;
  long eval_interval = 5000;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir = "runs";
  int eval_episodes = 10;

  void validate() const;

  // one "key = value" line per key, fixed order; the canonical form feeds the
  // config hash and the run-directory snapshot
  std::string canonical_text() const;
  uint64_t hash() const;  // FNV-1a over the canonical text

  void set(const std::string& key, const std::string& value);
  void apply_file(const std::string& path);
  void save_file(const std::string& path) const;

  static ExperimentConfig from_file(const std::string& path);
  static const std::vector<std::string>& known_keys();
};

uint64_t fnv1a64(const std::string& text);

}  // namespace pave
