#include "pave/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pave {

void TD3Config::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("TD3Config: gamma must be in [0, 1)");
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("TD3Config: tau must be in (0, 1]");
  if (policy_delay < 1) throw std::invalid_argument("TD3Config: policy_delay must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TD3Config: batch_size must be >= 1");
  if (actor_lr < 0.0 || critic_lr < 0.0) throw std::invalid_argument("TD3Config: learning rates must be nonnegative");
  if (warmup_steps < 0) throw std::invalid_argument("TD3Config: warmup_steps must be >= 0");
  if (buffer_capacity == 0) throw std::invalid_argument("TD3Config: buffer capacity must be positive");
  if (target_noise < 0.0 || target_noise_clip < 0.0 || exploration_noise < 0.0) {
    throw std::invalid_argument("TD3Config: noise scales must be nonnegative");
  }
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("TD3Config: hidden sizes must be positive");
  }
}

TD3Agent::TD3Agent(int state_dim, int action_dim, double action_bound, TD3Config cfg,
                   uint64_t master_seed)
    : k_(state_dim),
      d_(action_dim),
      bound_(action_bound),
      cfg_(std::move(cfg)),
      replay_(state_dim, action_dim, 1) {
  cfg_.validate();
  actor_ = ActorNetwork(k_, d_, cfg_.hidden, bound_);
  critic1_ = CriticNetwork(k_, d_, cfg_.hidden);
  critic2_ = CriticNetwork(k_, d_, cfg_.hidden);

  Rng init = Rng::stream(master_seed, Stream::kInit);
  actor_.init_uniform(init);
  critic1_.init_uniform(init);
  critic2_.init_uniform(init);
  targets_.actor = actor_;
  targets_.critic1 = critic1_;
  targets_.critic2 = critic2_;

  opt_actor_ = Adam(actor_.params().size(), cfg_.actor_lr);
  opt_critic1_ = Adam(critic1_.params().size(), cfg_.critic_lr);
  opt_critic2_ = Adam(critic2_.params().size(), cfg_.critic_lr);

  replay_ = ReplayBuffer(k_, d_, cfg_.buffer_capacity);
  rng_explore_ = Rng::stream(master_seed, Stream::kExploration);
  rng_target_ = Rng::stream(master_seed, Stream::kTargetNoise);
  rng_replay_ = Rng::stream(master_seed, Stream::kReplay);
  rng_perturb_ = Rng::stream(master_seed, Stream::kPerturbation);
  rng_rademacher_ = Rng::stream(master_seed, Stream::kRademacher);
}

void TD3Agent::select_action(std::span<const double> s, std::span<double> a, bool explore) {
  actor_.act(s, a, scratch_);
  if (explore && cfg_.exploration_noise > 0.0) {
    for (double& x : a) {
      x += rng_explore_.normal(0.0, cfg_.exploration_noise * bound_);
    }
  }
  for (double& x : a) x = std::clamp(x, -bound_, bound_);
}

void TD3Agent::random_action(std::span<double> a) {
  for (double& x : a) x = rng_explore_.uniform(-bound_, bound_);
}

void TD3Agent::observe(std::span<const double> s, std::span<const double> a, double r,
                       std::span<const double> s_next, bool truncated) {
  replay_.push(s, a, r, s_next, truncated);
}

std::vector<double> TD3Agent::td_targets(const BatchView& batch) {
  std::vector<double> y(batch.count);
  std::vector<double> a_next(static_cast<size_t>(d_));
  for (size_t e = 0; e < batch.count; ++e) {
    targets_.actor.act(batch.row_sn(e), a_next, scratch_);
    for (double& x : a_next) {
      double noise = rng_target_.normal(0.0, cfg_.target_noise * bound_);
      noise = std::clamp(noise, -cfg_.target_noise_clip * bound_, cfg_.target_noise_clip * bound_);
      x = std::clamp(x + noise, -bound_, bound_);
    }
    double q1 = targets_.critic1.q(batch.row_sn(e), a_next, scratch_);
    double q2 = targets_.critic2.q(batch.row_sn(e), a_next, scratch_);
    double not_truncated = batch.truncated[e] ? 0.0 : 1.0;
    y[e] = batch.r[e] + cfg_.gamma * not_truncated * std::min(q1, q2);
  }
  return y;
}

void TD3Agent::soft_update(ParamVector& target, const ParamVector& online, double tau) {
  target.polyak_from(online, tau);
}

TD3Agent::CriticResult TD3Agent::critic_pass(CriticNetwork& critic, const BatchView& batch,
                                             std::span<const double> y,
                                             const std::vector<WeightedAux>& aux,
                                             std::vector<double>& grad_out) {
  const size_t B = batch.count;
  const size_t P = critic.params().size();
  slot_grads_.assign(B * P, 0.0);
  std::vector<double> td_vals(B, 0.0);
  std::vector<double> aux_vals(aux.size() * B, 0.0);
  std::vector<long> evals(B, 0);

  auto element_worker = [&](size_t e) {
    static thread_local Tape tape;
    Tape& t = tape;
    t.reset();
    Mlp::Bound bound = critic.bind(t);
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(k_), uint32_t(k_));
    NodeId a_node = t.leaf(batch.a.data() + e * size_t(d_), uint32_t(d_));
    NodeId q = critic.build_q(t, bound, s_node, a_node);
    NodeId diff = t.sub(q, t.constant(y[e]));
    NodeId loss = t.mul(diff, diff);
    td_vals[e] = t.value(loss);

    ElementContext ctx{t, critic, bound, s_node, a_node,
                       batch.row_s(e), batch.row_a(e), batch.row_sn(e), e};
    for (size_t j = 0; j < aux.size(); ++j) {
      NodeId term = aux[j].build(ctx);
      aux_vals[j * B + e] = t.value(term);
      loss = t.add(loss, t.mul(t.constant(aux[j].weight), term));
    }

    std::vector<NodeId> adj = t.backward(loss, bound.ids);
    double* row = slot_grads_.data() + e * P;
    for (size_t i = 0; i < adj.size(); ++i) {
      if (adj[i] == kNoNode) continue;
      std::span<const double> vals = t.values(adj[i]);
      std::memcpy(row + critic.params().offset(i), vals.data(), vals.size() * sizeof(double));
    }
    evals[e] = t.input_grad_evals();
  };

  if (cfg_.parallel_update) {
#pragma omp parallel for schedule(static)
    for (size_t e = 0; e < B; ++e) element_worker(e);
  } else {
    for (size_t e = 0; e < B; ++e) element_worker(e);
  }

  // fixed-order reduction keeps results identical across thread counts
  grad_out.assign(P, 0.0);
  for (size_t e = 0; e < B; ++e) {
    const double* row = slot_grads_.data() + e * P;
    for (size_t i = 0; i < P; ++i) grad_out[i] += row[i];
  }
  double inv = 1.0 / double(B);
  for (double& g : grad_out) g *= inv;

  CriticResult res;
  for (size_t e = 0; e < B; ++e) res.td += td_vals[e];
  res.td *= inv;
  res.aux_means.resize(aux.size(), 0.0);
  for (size_t j = 0; j < aux.size(); ++j) {
    for (size_t e = 0; e < B; ++e) res.aux_means[j] += aux_vals[j * B + e];
    res.aux_means[j] *= inv;
  }
  for (size_t e = 0; e < B; ++e) res.grad_evals += evals[e];
  return res;
}

UpdateStats TD3Agent::update() {
  UpdateStats stats;
  std::vector<size_t> idx = replay_.sample_indices(size_t(cfg_.batch_size), rng_replay_);
  BatchView batch = gather_batch(replay_, idx);
  std::vector<double> y = td_targets(batch);

  std::vector<WeightedAux> aux;
  if (aux_provider_) aux = aux_provider_(batch, rng_perturb_, rng_rademacher_);

  std::vector<double> grad1, grad2;
  CriticResult r1 = critic_pass(critic1_, batch, y, aux, grad1);
  CriticResult r2 = critic_pass(critic2_, batch, y, aux, grad2);

  stats.l_td = r1.td + r2.td;
  stats.l_total = stats.l_td;
  for (size_t j = 0; j < aux.size(); ++j) {
    double mean = r1.aux_means[j] + r2.aux_means[j];
    stats.l_total += aux[j].weight * mean;
    if (aux[j].name == "mpr") stats.l_mpr = mean;
    else if (aux[j].name == "vfc") stats.l_vfc = mean;
    else if (aux[j].name == "curv") stats.l_curv = mean;
  }
  stats.input_grad_evals = r1.grad_evals + r2.grad_evals;

  if (!std::isfinite(stats.l_total)) {
    stats.skipped = true;
    return stats;
  }

  opt_critic1_.step(critic1_.params().flat(), grad1);
  opt_critic2_.step(critic2_.params().flat(), grad2);
  ++updates_;

  if (updates_ % cfg_.policy_delay == 0) {
    ParamVector agrad = actor_gradient(batch);
    opt_actor_.step(actor_.params().flat(), agrad.flat());
    soft_update(targets_.critic1.params(), critic1_.params(), cfg_.tau);
    soft_update(targets_.critic2.params(), critic2_.params(), cfg_.tau);
    soft_update(targets_.actor.params(), actor_.params(), cfg_.tau);
    stats.actor_updated = true;
  }
  return stats;
}

ParamVector TD3Agent::actor_gradient(const BatchView& batch) {
  const size_t B = batch.count;
  const size_t P = actor_.params().size();
  slot_grads_.assign(B * P, 0.0);

  auto element_worker = [&](size_t e) {
    static thread_local Tape tape;
    Tape& t = tape;
    t.reset();
    Mlp::Bound bound_a = actor_.bind(t);
    Mlp::Bound bound_c = critic1_.bind(t);
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(k_), uint32_t(k_));
    NodeId a = actor_.build_action(t, bound_a, s_node);
    NodeId q = critic1_.build_q(t, bound_c, s_node, a);
    NodeId loss = t.neg(q);  // descend on -Q to ascend on Q
    std::vector<NodeId> adj = t.backward(loss, bound_a.ids);
    double* row = slot_grads_.data() + e * P;
    for (size_t i = 0; i < adj.size(); ++i) {
      if (adj[i] == kNoNode) continue;
      std::span<const double> vals = t.values(adj[i]);
      std::memcpy(row + actor_.params().offset(i), vals.data(), vals.size() * sizeof(double));
    }
  };

  if (cfg_.parallel_update) {
#pragma omp parallel for schedule(static)
    for (size_t e = 0; e < B; ++e) element_worker(e);
  } else {
    for (size_t e = 0; e < B; ++e) element_worker(e);
  }

  ParamVector grad(std::vector<ParamShape>(actor_.params().layout()));
  for (size_t e = 0; e < B; ++e) {
    const double* row = slot_grads_.data() + e * P;
    for (size_t i = 0; i < P; ++i) grad.flat()[i] += row[i];
  }
  double inv = 1.0 / double(B);
  for (double& g : grad.flat()) g *= inv;
  return grad;
}

namespace {
constexpr char kCkptMagic[4] = {'P', 'V', 'C', 'K'};
constexpr uint32_t kCkptVersion = 1;
}  // namespace

void TD3Agent::save_checkpoint(const std::string& path, uint64_t step, uint64_t config_hash) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kCkptMagic, 4);
  io::put_u32(os, kCkptVersion);
  io::put_u64(os, step);
  io::put_u64(os, config_hash);
  io::put_u32(os, uint32_t(k_));
  io::put_u32(os, uint32_t(d_));
  io::put_f64(os, bound_);
  io::put_u32(os, uint32_t(cfg_.hidden.size()));
  for (int h : cfg_.hidden) io::put_u32(os, uint32_t(h));
  actor_.params().save_binary(os);
  critic1_.params().save_binary(os);
  critic2_.params().save_binary(os);
  targets_.actor.params().save_binary(os);
  targets_.critic1.params().save_binary(os);
  targets_.critic2.params().save_binary(os);
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw std::runtime_error("read_checkpoint: bad magic in " + path);
  }
  if (io::get_u32(is) != kCkptVersion) throw std::runtime_error("read_checkpoint: unsupported version");
  CheckpointData data;
  data.step = io::get_u64(is);
  data.config_hash = io::get_u64(is);
  data.k = int(io::get_u32(is));
  data.d = int(io::get_u32(is));
  data.bound = io::get_f64(is);
  uint32_t nh = io::get_u32(is);
  data.hidden.resize(nh);
  for (uint32_t i = 0; i < nh; ++i) data.hidden[i] = int(io::get_u32(is));
  data.actor = ParamVector::load_binary(is);
  data.critic1 = ParamVector::load_binary(is);
  data.critic2 = ParamVector::load_binary(is);
  data.actor_target = ParamVector::load_binary(is);
  data.critic1_target = ParamVector::load_binary(is);
  data.critic2_target = ParamVector::load_binary(is);
  return data;
}

ActorNetwork CheckpointData::make_actor() const {
  ActorNetwork net(k, d, hidden, bound);
  net.params().set_flat(actor.flat());
  return net;
}

CriticNetwork CheckpointData::make_critic1() const {
  CriticNetwork net(k, d, hidden);
  net.params().set_flat(critic1.flat());
  return net;
}

CriticNetwork CheckpointData::make_critic2() const {
  CriticNetwork net(k, d, hidden);
  net.params().set_flat(critic2.flat());
  return net;
}

TD3Agent::CheckpointInfo TD3Agent::load_checkpoint(const std::string& path) {
  CheckpointData data = read_checkpoint(path);
  if (data.k != k_ || data.d != d_ || data.bound != bound_ || data.hidden != cfg_.hidden) {
    throw std::runtime_error("load_checkpoint: architecture mismatch in " + path);
  }
  auto load_into = [&](ParamVector& dst, const ParamVector& src) {
    if (!src.same_layout(dst)) throw std::runtime_error("load_checkpoint: layout mismatch");
    dst.set_flat(src.flat());
  };
  load_into(actor_.params(), data.actor);
  load_into(critic1_.params(), data.critic1);
  load_into(critic2_.params(), data.critic2);
  load_into(targets_.actor.params(), data.actor_target);
  load_into(targets_.critic1.params(), data.critic1_target);
  load_into(targets_.critic2.params(), data.critic2_target);
  CheckpointInfo info;
  info.step = data.step;
  info.config_hash = data.config_hash;
  return info;
}

NodeId build_td_loss(Tape& t, const CriticNetwork& c1, const Mlp::Bound& b1,
                     const CriticNetwork& c2, const Mlp::Bound& b2, const BatchView& batch,
                     std::span<const double> y) {
  if (batch.count == 0) throw std::invalid_argument("build_td_loss: empty batch");
  NodeId acc = t.constant(0.0);
  for (size_t e = 0; e < batch.count; ++e) {
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(batch.k), uint32_t(batch.k));
    NodeId a_node = t.leaf(batch.a.data() + e * size_t(batch.d), uint32_t(batch.d));
    NodeId yk = t.constant(y[e]);
    NodeId d1 = t.sub(c1.build_q(t, b1, s_node, a_node), yk);
    NodeId d2 = t.sub(c2.build_q(t, b2, s_node, a_node), yk);
    acc = t.add(acc, t.add(t.mul(d1, d1), t.mul(d2, d2)));
  }
  return t.mul(acc, t.constant(1.0 / double(batch.count)));
}

}  // namespace pave
