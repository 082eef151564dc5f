#include "pave/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pave/checks.hpp"

namespace pave {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void mean_std(std::span<const double> xs, double* mean, double* sd) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var = xs.size() > 1 ? var / double(xs.size() - 1) : 0.0;
  *mean = m;
  *sd = std::sqrt(var);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

}  // namespace

SeedRunResult train_one_seed(const ExperimentConfig& cfg, uint64_t seed) {
  cfg.validate();
  SeedRunResult result;
  result.seed = seed;
  result.run_dir = cfg.out_dir + "/run_seed" + std::to_string(seed);
  fs::create_directories(result.run_dir);
  cfg.save_file(result.run_dir + "/config.cfg");

  const std::string variant = cfg.pave.all_zero() ? "base" : "pave";
  const uint64_t config_hash = cfg.hash();

  TD3Agent agent(PendulumEnv::kObsDim, PendulumEnv::kActDim, PendulumEnv::kMaxTorque, cfg.td3, seed);
  agent.set_aux_provider(make_pave_provider(cfg.pave));

  PendulumEnv env;
  Rng env_seeder = Rng::stream(seed, Stream::kEnv);
  Rng train_noise = Rng::stream(seed, Stream::kObsNoise);
  NoiseWrapperConfig train_noise_cfg;
  train_noise_cfg.sigma = cfg.env_train_noise_sigma;
  train_noise_cfg.sigma_base = {1.0, 1.0, 1.0};  // no policy to calibrate against yet

  std::ofstream log = open_out(result.run_dir + "/runlog.csv");
  log << "step,episode_return,l_td,l_mpr,l_vfc,l_curv,lambda1,lambda2,lambda3,checkpoint\n";

  StepResult sr = env.reset(env_seeder.next_u64());
  std::vector<double> obs(sr.observation.begin(), sr.observation.end());
  std::vector<double> policy_obs(3), action(1);
  double episode_return = 0.0;
  UpdateStats last;
  std::string pending_checkpoint;
  int skip_streak = 0;

  for (long t = 1; t <= cfg.total_steps; ++t) {
    policy_obs = obs;
    if (train_noise_cfg.sigma > 0.0) noisy_observe(policy_obs, train_noise_cfg, train_noise);

    if (t <= cfg.td3.warmup_steps) {
      agent.random_action(action);
    } else {
      agent.select_action(policy_obs, action, /*explore=*/true);
    }
    sr = env.step(action[0]);
    std::vector<double> next_obs(sr.observation.begin(), sr.observation.end());
    std::vector<double> next_policy_obs = next_obs;
    if (train_noise_cfg.sigma > 0.0) noisy_observe(next_policy_obs, train_noise_cfg, train_noise);
    agent.observe(policy_obs, action, sr.reward, next_policy_obs, sr.truncated);
    episode_return += sr.reward;
    obs = next_obs;

    if (t > cfg.td3.warmup_steps && agent.ready()) {
      last = agent.update();
      skip_streak = last.skipped ? skip_streak + 1 : 0;
      if (skip_streak > 100) {
        std::ofstream meta = open_out(result.run_dir + "/run_meta.csv");
        meta << "key,value\nseed," << seed << "\nvariant," << variant << "\nconfig_hash,"
             << config_hash << "\ntotal_steps," << t << "\naborted,1\n";
        std::cerr << "train: seed " << seed << " aborted at step " << t
                  << ": non-finite loss streak exceeded 100 updates\n";
        result.aborted = true;
        return result;
      }
    }

    if (t % cfg.eval_interval == 0 || t == cfg.total_steps) {
      std::string ckpt = result.run_dir + "/ckpt_step" + std::to_string(t) + ".bin";
      agent.save_checkpoint(ckpt, uint64_t(t), config_hash);
      pending_checkpoint = ckpt;
      result.final_checkpoint = ckpt;
    }

    if (sr.truncated) {
      log << t << ',' << fmt(episode_return) << ',' << fmt(last.l_td) << ',' << fmt(last.l_mpr)
          << ',' << fmt(last.l_vfc) << ',' << fmt(last.l_curv) << ',' << fmt(cfg.pave.lambda1)
          << ',' << fmt(cfg.pave.lambda2) << ',' << fmt(cfg.pave.lambda3) << ','
          << pending_checkpoint << "\n";
      pending_checkpoint.clear();
      result.last_episode_return = episode_return;
      sr = env.reset(env_seeder.next_u64());
      obs.assign(sr.observation.begin(), sr.observation.end());
      episode_return = 0.0;
    }
  }

  std::ofstream meta = open_out(result.run_dir + "/run_meta.csv");
  meta << "key,value\nseed," << seed << "\nvariant," << variant << "\nconfig_hash," << config_hash
       << "\ntotal_steps," << cfg.total_steps << "\naborted,0\n";
  return result;
}

std::vector<double> estimate_policy_sigma_base(const ActorNetwork& actor, uint64_t eval_seed) {
  PendulumEnv env;
  Rng env_seeder = Rng::stream(eval_seed, Stream::kEval, /*index=*/1);
  MlpScratch scratch;
  std::vector<double> obs(3), a(1);
  std::vector<std::array<double, 3>> seen;
  seen.reserve(10 * PendulumEnv::kEpisodeSteps);
  for (int ep = 0; ep < 10; ++ep) {
    StepResult sr = env.reset(env_seeder.next_u64());
    seen.push_back(sr.observation);
    bool done = false;
    while (!done) {
      obs.assign(sr.observation.begin(), sr.observation.end());
      actor.act(obs, a, scratch);
      sr = env.step(a[0]);
      seen.push_back(sr.observation);
      done = sr.truncated;
    }
  }
  return estimate_sigma_base(seen);
}

EvalSummary evaluate_policy(const ActorNetwork& actor, int episodes, double noise_sigma,
                            std::span<const double> sigma_base, uint64_t eval_seed,
                            const std::string& trajectory_csv) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  if (noise_sigma > 0.0 && sigma_base.size() != 3) {
    throw std::invalid_argument("evaluate_policy: noise needs a 3-entry sigma_base");
  }

  PendulumEnv env;
  Rng env_seeder = Rng::stream(eval_seed, Stream::kEval);
  Rng noise_rng = Rng::stream(eval_seed, Stream::kObsNoise);
  NoiseWrapperConfig ncfg;
  ncfg.sigma = noise_sigma;
  ncfg.sigma_base.assign(sigma_base.begin(), sigma_base.end());
  if (ncfg.sigma_base.empty()) ncfg.sigma_base = {1.0, 1.0, 1.0};

  MlpScratch scratch;
  EvalSummary summary;
  std::vector<TrajectoryRow> rows;

  for (int ep = 0; ep < episodes; ++ep) {
    StepResult sr = env.reset(env_seeder.next_u64());
    std::vector<double> obs(sr.observation.begin(), sr.observation.end());
    std::vector<double> policy_obs(3), a(1);
    std::vector<double> rewards;
    ActionTrace trace;
    trace.dt = PendulumEnv::kDt;
    trace.series.assign(1, {});
    bool done = false;
    int t = 0;
    while (!done) {
      policy_obs = obs;
      if (ncfg.sigma > 0.0) noisy_observe(policy_obs, ncfg, noise_rng);
      actor.act(policy_obs, a, scratch);
      sr = env.step(a[0]);
      rewards.push_back(sr.reward);
      trace.series[0].push_back(a[0]);
      if (ep == 0 && !trajectory_csv.empty()) {
        rows.push_back({t, env.state().theta, env.state().theta_dot, a[0], sr.reward,
                        sr.observation});
      }
      obs.assign(sr.observation.begin(), sr.observation.end());
      done = sr.truncated;
      ++t;
    }
    summary.returns.push_back(cumulative_return(rewards));
    summary.smoothness.push_back(smoothness_score(trace).aggregate);
  }

  if (!trajectory_csv.empty()) write_trajectory_csv(trajectory_csv, rows);
  mean_std(summary.returns, &summary.mean_return, &summary.std_return);
  mean_std(summary.smoothness, &summary.mean_smoothness, &summary.std_smoothness);
  return summary;
}

void write_metrics_csv(const std::string& path, uint64_t seed, const EvalSummary& summary) {
  std::ofstream os = open_out(path);
  os << "seed,episode,return,smoothness_dim0,smoothness_mean\n";
  for (size_t ep = 0; ep < summary.returns.size(); ++ep) {
    os << seed << ',' << ep << ',' << fmt(summary.returns[ep]) << ','
       << fmt(summary.smoothness[ep]) << ',' << fmt(summary.smoothness[ep]) << "\n";
  }
}

ReferencePoint greedy_reference(const ActorNetwork& actor, uint64_t eval_seed) {
  PendulumEnv env;
  Rng env_seeder = Rng::stream(eval_seed, Stream::kEval);
  StepResult sr = env.reset(env_seeder.next_u64());
  ReferencePoint ref;
  ref.s.assign(sr.observation.begin(), sr.observation.end());
  ref.a.resize(1);
  MlpScratch scratch;
  actor.act(ref.s, ref.a, scratch);
  return ref;
}

QuadraticCritic parse_quadratic_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("quadratic spec: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos) return std::string();
      size_t b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("quadratic spec: missing key " + key);
    return it->second;
  };
  auto parse_values = [&](const std::string& key, size_t expect) {
    std::vector<double> out;
    std::stringstream ss(need(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      out.push_back(std::stod(item));
    }
    if (out.size() != expect) {
      throw std::runtime_error("quadratic spec: " + key + " needs " + std::to_string(expect) +
                               " values");
    }
    return out;
  };

  int k = std::stoi(need("k")), d = std::stoi(need("d"));
  if (k < 1 || d < 1) throw std::runtime_error("quadratic spec: dims must be positive");
  QuadraticCritic qc;
  qc.c = kv.count("c") ? std::stod(kv["c"]) : 0.0;
  qc.g_s = parse_values("g_s", size_t(k));
  qc.g_a = parse_values("g_a", size_t(d));
  qc.A = Mat(k, k);
  qc.A.v = parse_values("A", size_t(k) * size_t(k));
  qc.B = Mat(k, d);
  qc.B.v = parse_values("B", size_t(k) * size_t(d));
  qc.C = Mat(d, d);
  qc.C.v = parse_values("C", size_t(d) * size_t(d));
  return qc;
}

int cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  bool any_aborted = false;
  for (uint64_t seed : cfg.seeds) {
    SeedRunResult r = train_one_seed(cfg, seed);
    any_aborted = any_aborted || r.aborted;
    std::cout << "train: seed " << seed << (r.aborted ? " ABORTED" : " done")
              << " last_episode_return=" << fmt_short(r.last_episode_return) << " dir=" << r.run_dir
              << "\n";
  }
  return any_aborted ? kExitNumerical : kExitOk;
}

int cmd_eval(const CliArgs& args) {
  if (!args.checkpoint) throw std::invalid_argument("eval: --checkpoint is required");
  if (args.episodes < 1) throw std::invalid_argument("eval: --episodes must be >= 1");
  CheckpointData data = read_checkpoint(*args.checkpoint);
  ActorNetwork actor = data.make_actor();
  fs::create_directories(args.out_dir);

  std::vector<double> sigma_base = estimate_policy_sigma_base(actor, args.eval_seed);
  {
    std::ofstream meta = open_out(args.out_dir + "/eval_meta.csv");
    meta << "key,value\ncheckpoint," << *args.checkpoint << "\nstep," << data.step
         << "\nepisodes," << args.episodes << "\neval_seed," << args.eval_seed << "\nsigma_base_0,"
         << fmt(sigma_base[0]) << "\nsigma_base_1," << fmt(sigma_base[1]) << "\nsigma_base_2,"
         << fmt(sigma_base[2]) << "\n";
  }

  for (double sigma : args.noise_sigmas) {
    if (sigma < 0.0) throw std::invalid_argument("eval: noise sigma must be nonnegative");
    std::string traj;
    if (args.dump_trajectory && sigma == 0.0) traj = args.out_dir + "/trajectory.csv";
    EvalSummary summary =
        evaluate_policy(actor, args.episodes, sigma, sigma_base, args.eval_seed, traj);
    std::string path = args.out_dir + "/metrics_sigma" + fmt_short(sigma) + ".csv";
    write_metrics_csv(path, args.eval_seed, summary);
    std::cout << "eval: sigma=" << fmt_short(sigma) << " mean_return=" << fmt_short(summary.mean_return)
              << " mean_smoothness=" << fmt_short(summary.mean_smoothness) << " -> " << path << "\n";
  }
  return kExitOk;
}

int cmd_probe(const CliArgs& args) {
  fs::create_directories(args.out_dir);
  if (args.quadratic) {
    QuadraticCritic qc = parse_quadratic_file(*args.quadratic);
    std::vector<double> origin(static_cast<size_t>(qc.state_dim()), 0.0);
    JacobianReport rep = implicit_policy_jacobian(qc, origin);
    Rng rng(args.eval_seed);
    LipschitzReport lip = lipschitz_bound_check(qc, 1000, 2.0, rng);

    std::ofstream os = open_out(args.out_dir + "/probe_report.csv");
    os << "key,value\n";
    os << "kind,quadratic\n";
    os << "M," << fmt(rep.M) << "\nmu," << fmt(rep.mu) << "\nbound," << fmt(rep.bound)
       << "\nJ_norm," << fmt(rep.J_norm) << "\nmax_ratio," << fmt(lip.max_ratio) << "\nviolations,"
       << lip.violations << "\npairs," << lip.pairs << "\n";
    for (int r = 0; r < rep.J.rows; ++r) {
      for (int c = 0; c < rep.J.cols; ++c) {
        os << "J_" << r << "_" << c << ',' << fmt(rep.J(r, c)) << "\n";
      }
    }
    std::cout << "probe: bound=" << fmt_short(rep.bound) << " J_norm=" << fmt_short(rep.J_norm)
              << " max_ratio=" << fmt_short(lip.max_ratio) << " violations=" << lip.violations << "\n";
    return kExitOk;
  }

  if (!args.checkpoint) {
    throw std::invalid_argument("probe: need --checkpoint or --quadratic");
  }
  CheckpointData data = read_checkpoint(*args.checkpoint);
  ActorNetwork actor = data.make_actor();
  CriticNetwork critic = data.make_critic1();
  ReferencePoint ref = greedy_reference(actor, args.eval_seed);
  NetworkField field(critic);
  std::pair<int, int> axes = dominant_axis_selection(field, ref.s, ref.a, args.fd_eps);

  LandscapeOptions opt;
  opt.grid_n = args.grid_n;
  opt.clip = args.clip;
  opt.fd_eps = args.fd_eps;
  LandscapeGrid grid = mixed_partial_landscape(field, ref.s, ref.a, axes.first, axes.second, opt);
  write_landscape_csv(args.out_dir + "/landscape.csv", grid);

  std::ofstream os = open_out(args.out_dir + "/probe_report.csv");
  os << "key,value\n";
  os << "kind,network\ncheckpoint," << *args.checkpoint << "\nstep," << data.step
     << "\nstate_axis," << axes.first << "\naction_axis," << axes.second << "\ngrid_n,"
     << args.grid_n << "\nclip," << fmt(args.clip) << "\nfd_eps," << fmt(args.fd_eps)
     << "\ngrid_mean," << fmt(grid.mean()) << "\ngrid_max," << fmt(grid.max()) << "\n";
  for (size_t i = 0; i < ref.s.size(); ++i) os << "ref_s_" << i << ',' << fmt(ref.s[i]) << "\n";
  for (size_t i = 0; i < ref.a.size(); ++i) os << "ref_a_" << i << ',' << fmt(ref.a[i]) << "\n";
  std::cout << "probe: axes=(" << axes.first << "," << axes.second << ") grid_mean="
            << fmt_short(grid.mean()) << " grid_max=" << fmt_short(grid.max()) << "\n";
  return kExitOk;
}

namespace {

struct ArmOutcome {
  std::vector<double> mean_returns, mean_smooth;
  bool aborted = false;
};

ArmOutcome run_arm(const ExperimentConfig& cfg) {
  ArmOutcome out;
  for (uint64_t seed : cfg.seeds) {
    SeedRunResult r = train_one_seed(cfg, seed);
    if (r.aborted) {
      out.aborted = true;
      return out;
    }
    CheckpointData data = read_checkpoint(r.final_checkpoint);
    ActorNetwork actor = data.make_actor();
    EvalSummary s = evaluate_policy(actor, cfg.eval_episodes, 0.0, {}, seed);
    out.mean_returns.push_back(s.mean_return);
    out.mean_smooth.push_back(s.mean_smoothness);
  }
  return out;
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir) {
  static const std::vector<std::string> allowed = {"lambda1", "lambda2", "lambda3", "sigma",
                                                   "delta"};
  if (std::find(allowed.begin(), allowed.end(), param) == allowed.end()) {
    throw std::invalid_argument("sweep: parameter must be one of lambda1, lambda2, lambda3, sigma, delta");
  }
  if (values.empty()) throw std::invalid_argument("sweep: value list must be nonempty");
  fs::create_directories(out_dir);
  std::ofstream os = open_out(out_dir + "/sweep.csv");
  os << "param,value,seed,mean_return,mean_smoothness\n";

  for (double value : values) {
    ExperimentConfig arm = cfg;
    arm.set("pave." + param, fmt(value));
    arm.out_dir = out_dir + "/" + param + "_" + fmt_short(value);
    for (uint64_t seed : arm.seeds) {
      SeedRunResult r = train_one_seed(arm, seed);
      if (r.aborted) return kExitNumerical;
      CheckpointData data = read_checkpoint(r.final_checkpoint);
      ActorNetwork actor = data.make_actor();
      EvalSummary s = evaluate_policy(actor, arm.eval_episodes, 0.0, {}, seed);
      os << param << ',' << fmt_short(value) << ',' << seed << ',' << fmt(s.mean_return) << ','
         << fmt(s.mean_smoothness) << "\n";
    }
  }
  std::cout << "sweep: wrote " << out_dir + "/sweep.csv" << "\n";
  return kExitOk;
}

int cmd_ablate(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);

  struct Arm {
    const char* label;
    double l1, l2, l3;
  };
  const std::vector<Arm> arms = {
      {"base", 0.0, 0.0, 0.0},
      {"mpr", cfg.pave.lambda1, 0.0, 0.0},
      {"mpr_vfc", cfg.pave.lambda1, cfg.pave.lambda2, 0.0},
      {"mpr_vfc_curv", cfg.pave.lambda1, cfg.pave.lambda2, cfg.pave.lambda3},
  };

  std::string seeds_joined;
  for (size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) seeds_joined += ";";
    seeds_joined += std::to_string(cfg.seeds[i]);
  }

  std::ofstream os = open_out(out_dir + "/ablation.csv");
  os << "arm,lambda1,lambda2,lambda3,seeds,mean_return,std_return,mean_smoothness,std_smoothness\n";
  for (const Arm& arm : arms) {
    ExperimentConfig ac = cfg;
    ac.pave.lambda1 = arm.l1;
    ac.pave.lambda2 = arm.l2;
    ac.pave.lambda3 = arm.l3;
    ac.out_dir = out_dir + "/" + arm.label;
    ArmOutcome outcome = run_arm(ac);
    if (outcome.aborted) return kExitNumerical;
    double mr, sr, ms, ss;
    mean_std(outcome.mean_returns, &mr, &sr);
    mean_std(outcome.mean_smooth, &ms, &ss);
    os << arm.label << ',' << fmt(arm.l1) << ',' << fmt(arm.l2) << ',' << fmt(arm.l3) << ','
       << seeds_joined << ',' << fmt(mr) << ',' << fmt(sr) << ',' << fmt(ms) << ',' << fmt(ss)
       << "\n";
    std::cout << "ablate: " << arm.label << " mean_return=" << fmt_short(mr)
              << " mean_smoothness=" << fmt_short(ms) << "\n";
  }
  std::cout << "ablate: wrote " << out_dir + "/ablation.csv" << "\n";
  return kExitOk;
}

int cmd_selftest() {
  std::vector<CheckResult> results = run_fast_oracle_checks();
  bool all = true;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "ok   " : "FAIL ") << r.name << " (" << fmt_short(r.seconds) << "s)"
              << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
    all = all && r.pass;
  }
  return all ? kExitOk : kExitValidation;
}

namespace {

std::vector<double> parse_double_list(const std::string& name, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value in " + name + ": '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    if (argc < 2) {
      std::cerr << "usage: pave <train|eval|probe|sweep|ablate|selftest> [--config FILE]"
                   " [--<config.key> value] [command flags]\n";
      return kExitValidation;
    }
    CliArgs args;
    args.command = argv[1];

    std::optional<std::string> out_flag;
    for (int i = 2; i < argc; ++i) {
      std::string flag = argv[i];
      if (flag.rfind("--", 0) != 0) throw std::invalid_argument("unexpected argument '" + flag + "'");
      std::string name = flag.substr(2);
      if (name == "dump-trajectory") {
        args.dump_trajectory = true;
        continue;
      }
      if (i + 1 >= argc) throw std::invalid_argument("flag --" + name + " needs a value");
      std::string value = argv[++i];
      if (name == "config") args.config_file = value;
      else if (name == "out") out_flag = value;
      else if (name == "checkpoint") args.checkpoint = value;
      else if (name == "quadratic") args.quadratic = value;
      else if (name == "episodes") args.episodes = std::stoi(value);
      else if (name == "noise-sigmas") args.noise_sigmas = parse_double_list(name, value);
      else if (name == "eval-seed") args.eval_seed = uint64_t(std::stoull(value));
      else if (name == "param") args.sweep_param = value;
      else if (name == "values") args.sweep_values = parse_double_list(name, value);
      else if (name == "grid-n") args.grid_n = std::stoi(value);
      else if (name == "clip") args.clip = std::stod(value);
      else if (name == "fd-eps") args.fd_eps = std::stod(value);
      else args.overrides.push_back({name, value});  // mirrors a config key
    }

    ExperimentConfig cfg;
    if (args.config_file) cfg.apply_file(*args.config_file);
    for (const auto& [key, value] : args.overrides) cfg.set(key, value);
    if (out_flag) cfg.out_dir = *out_flag;
    args.out_dir = out_flag.value_or(cfg.out_dir);

    if (args.command == "train") return cmd_train(cfg);
    if (args.command == "eval") return cmd_eval(args);
    if (args.command == "probe") return cmd_probe(args);
    if (args.command == "sweep") return cmd_sweep(cfg, args.sweep_param, args.sweep_values, args.out_dir);
    if (args.command == "ablate") return cmd_ablate(cfg, args.out_dir);
    if (args.command == "selftest") return cmd_selftest();
    throw std::invalid_argument("unknown command '" + args.command + "'");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace pave
