#include "pave/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pave {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean value for " + key + ": '" + v + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

std::string join_longs(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_seeds(const std::vector<uint64_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  td3.validate();
  pave.validate();
  if (env_train_noise_sigma < 0.0) {
    throw std::invalid_argument("config: env.train_noise_sigma must be nonnegative");
  }
  if (seeds.empty()) throw std::invalid_argument("config: run.seeds must be nonempty");
  if (total_steps < td3.warmup_steps) {
    throw std::invalid_argument("config: run.total_steps must cover the warmup");
  }
  if (eval_interval < 1) throw std::invalid_argument("config: run.eval_interval must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("config: run.eval_episodes must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("config: run.out_dir must be set");
}

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "env.train_noise_sigma",
      "td3.gamma", "td3.tau", "td3.policy_delay", "td3.target_noise", "td3.target_noise_clip",
      "td3.exploration_noise", "td3.batch_size", "td3.actor_lr", "td3.critic_lr",
      "td3.warmup_steps", "td3.buffer_capacity", "td3.hidden", "td3.parallel_update",
      "pave.lambda1", "pave.lambda2", "pave.lambda3", "pave.sigma", "pave.delta",
      "pave.n_rademacher",
      "run.total_steps", "run.eval_interval", "run.seeds", "run.out_dir", "run.eval_episodes",
  };
  return keys;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "env.train_noise_sigma") env_train_noise_sigma = parse_double(key, v);
  else if (key == "td3.gamma") td3.gamma = parse_double(key, v);
  else if (key == "td3.tau") td3.tau = parse_double(key, v);
  else if (key == "td3.policy_delay") td3.policy_delay = int(parse_long(key, v));
  else if (key == "td3.target_noise") td3.target_noise = parse_double(key, v);
  else if (key == "td3.target_noise_clip") td3.target_noise_clip = parse_double(key, v);
  else if (key == "td3.exploration_noise") td3.exploration_noise = parse_double(key, v);
  else if (key == "td3.batch_size") td3.batch_size = int(parse_long(key, v));
  else if (key == "td3.actor_lr") td3.actor_lr = parse_double(key, v);
  else if (key == "td3.critic_lr") td3.critic_lr = parse_double(key, v);
  else if (key == "td3.warmup_steps") td3.warmup_steps = int(parse_long(key, v));
  else if (key == "td3.buffer_capacity") td3.buffer_capacity = size_t(parse_long(key, v));
  else if (key == "td3.hidden") {
    std::vector<long> h = parse_list<long>(key, v, parse_long);
    td3.hidden.assign(h.begin(), h.end());
  } else if (key == "td3.parallel_update") td3.parallel_update = parse_bool(key, v);
  else if (key == "pave.lambda1") pave.lambda1 = parse_double(key, v);
  else if (key == "pave.lambda2") pave.lambda2 = parse_double(key, v);
  else if (key == "pave.lambda3") pave.lambda3 = parse_double(key, v);
  else if (key == "pave.sigma") pave.sigma = parse_double(key, v);
  else if (key == "pave.delta") pave.delta = parse_double(key, v);
  else if (key == "pave.n_rademacher") pave.n_rademacher = int(parse_long(key, v));
  else if (key == "run.total_steps") total_steps = parse_long(key, v);
  else if (key == "run.eval_interval") eval_interval = parse_long(key, v);
  else if (key == "run.seeds") {
    std::vector<long> s = parse_list<long>(key, v, parse_long);
    seeds.clear();
    for (long x : s) {
      if (x < 0) throw std::invalid_argument("config: seeds must be nonnegative");
      seeds.push_back(uint64_t(x));
    }
  } else if (key == "run.out_dir") out_dir = v;
  else if (key == "run.eval_episodes") eval_episodes = int(parse_long(key, v));
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "env.train_noise_sigma = " << fmt(env_train_noise_sigma) << "\n";
  os << "td3.gamma = " << fmt(td3.gamma) << "\n";
  os << "td3.tau = " << fmt(td3.tau) << "\n";
  os << "td3.policy_delay = " << td3.policy_delay << "\n";
  os << "td3.target_noise = " << fmt(td3.target_noise) << "\n";
  os << "td3.target_noise_clip = " << fmt(td3.target_noise_clip) << "\n";
  os << "td3.exploration_noise = " << fmt(td3.exploration_noise) << "\n";
  os << "td3.batch_size = " << td3.batch_size << "\n";
  os << "td3.actor_lr = " << fmt(td3.actor_lr) << "\n";
  os << "td3.critic_lr = " << fmt(td3.critic_lr) << "\n";
  os << "td3.warmup_steps = " << td3.warmup_steps << "\n";
  os << "td3.buffer_capacity = " << td3.buffer_capacity << "\n";
  os << "td3.hidden = " << join_longs(td3.hidden) << "\n";
  os << "td3.parallel_update = " << (td3.parallel_update ? 1 : 0) << "\n";
  os << "pave.lambda1 = " << fmt(pave.lambda1) << "\n";
  os << "pave.lambda2 = " << fmt(pave.lambda2) << "\n";
  os << "pave.lambda3 = " << fmt(pave.lambda3) << "\n";
  os << "pave.sigma = " << fmt(pave.sigma) << "\n";
  os << "pave.delta = " << fmt(pave.delta) << "\n";
  os << "pave.n_rademacher = " << pave.n_rademacher << "\n";
  os << "run.total_steps = " << total_steps << "\n";
  os << "run.eval_interval = " << eval_interval << "\n";
  os << "run.seeds = " << join_seeds(seeds) << "\n";
  os << "run.out_dir = " << out_dir << "\n";
  os << "run.eval_episodes = " << eval_episodes << "\n";
  return os.str();
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical_text()); }

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: missing '=' at " + path + ":" + std::to_string(lineno));
    }
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void ExperimentConfig::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot write " + path);
  os << canonical_text();
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ExperimentConfig cfg;
  cfg.apply_file(path);
  return cfg;
}

}  // namespace pave
