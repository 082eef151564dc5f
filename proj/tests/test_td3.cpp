#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pave/regularizers.hpp"
#include "pave/replay.hpp"
#include "pave/rng.hpp"
#include "pave/td3.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pave;

namespace {

TD3Config small_cfg() {
  TD3Config cfg;
  cfg.hidden = {8, 8};
  cfg.batch_size = 16;
  cfg.warmup_steps = 0;
  cfg.buffer_capacity = 512;
  return cfg;
}

// random but finite transitions for update tests
void fill_buffer(TD3Agent& agent, int n, uint64_t seed, int k, int d) {
  Rng rng(seed);
  std::vector<double> s(static_cast<size_t>(k)), a(static_cast<size_t>(d)),
      sn(static_cast<size_t>(k));
  for (int i = 0; i < n; ++i) {
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    for (double& x : a) x = rng.uniform(-2.0, 2.0);
    for (double& x : sn) x = rng.uniform(-1.0, 1.0);
    agent.observe(s, a, rng.uniform(-1.0, 0.0), sn, (i % 50) == 49);
  }
}

bool params_equal(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("replay buffer wraps and samples uniformly") {
  ReplayBuffer buf(1, 1, 100);
  std::vector<double> s{0.0}, a{0.0};
  for (int i = 0; i < 250; ++i) {
    s[0] = double(i);
    buf.push(s, a, 0.0, s, false);
  }
  CHECK(buf.size() == 100);
  // oldest surviving entry is 150
  double min_seen = 1e9;
  for (size_t i = 0; i < buf.size(); ++i) min_seen = std::min(min_seen, buf.state(i)[0]);
  CHECK(min_seen == 150.0);

  // chi-square goodness of fit over 1e5 draws from a 100-slot buffer
  Rng rng(8);
  std::vector<long> counts(100, 0);
  const long n = 100000;
  for (long i = 0; i < n; ++i) ++counts[buf.sample_indices(1, rng)[0]];
  double expected = double(n) / 100.0;
  double chi2 = 0.0;
  for (long c : counts) chi2 += (double(c) - expected) * (double(c) - expected) / expected;
  CHECK(chi2 < 134.6416);  // upper 1% point, 99 degrees of freedom
}

TEST_CASE("gathered batches mirror the buffer rows") {
  ReplayBuffer buf(2, 1, 8);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> s{double(i), double(10 + i)}, a{double(-i)}, sn{double(2 * i), 0.5};
    buf.push(s, a, double(i) * 0.1, sn, i == 4);
  }
  std::vector<size_t> idx{4, 0, 2};
  BatchView b = gather_batch(buf, idx);
  CHECK(b.count == 3);
  CHECK(b.row_s(0)[0] == 4.0);
  CHECK(b.row_a(1)[0] == 0.0);
  CHECK(b.row_sn(2)[0] == 4.0);
  CHECK(b.r[2] == doctest::Approx(0.2));
  CHECK(b.truncated[0] == 1);
  CHECK(b.truncated[1] == 0);
}

TEST_CASE("greedy action selection is deterministic and bounded") {
  TD3Agent agent(3, 1, 2.0, small_cfg(), 99);
  std::vector<double> s{0.2, -0.4, 0.9}, a1{0.0}, a2{0.0};
  agent.select_action(s, a1, false);
  agent.select_action(s, a2, false);
  CHECK(a1[0] == a2[0]);

  TD3Config cfg = small_cfg();
  cfg.exploration_noise = 0.0;
  TD3Agent agent2(3, 1, 2.0, cfg, 99);
  std::vector<double> a3{0.0};
  agent2.select_action(s, a3, true);  // zero noise equals the greedy action
  CHECK(a3[0] == a1[0]);

  Rng rng(3);
  std::vector<double> a{0.0};
  for (int i = 0; i < 10000; ++i) {
    for (double& x : s) x = rng.uniform(-5.0, 5.0);
    agent.select_action(s, a, true);
    CHECK(std::fabs(a[0]) <= 2.0);
  }
}

TEST_CASE("zero discount makes the targets equal the rewards") {
  TD3Config cfg = small_cfg();
  cfg.gamma = 0.0;
  TD3Agent agent(2, 1, 2.0, cfg, 5);
  fill_buffer(agent, 40, 9, 2, 1);
  Rng rng(2);
  std::vector<size_t> idx = agent.replay().sample_indices(16, rng);
  BatchView batch = gather_batch(agent.replay(), idx);
  std::vector<double> y = agent.td_targets(batch);
  for (size_t e = 0; e < batch.count; ++e) CHECK(y[e] == batch.r[e]);
}

TEST_CASE("td loss vanishes when both critics match the targets") {
  CriticNetwork c1(1, 1, {}), c2(1, 1, {});
  c1.params().entry(0)[0] = 0.5;
  c1.params().entry(0)[1] = -0.25;
  c1.params().entry(1)[0] = 0.1;
  c2.params() = c1.params();

  ReplayBuffer buf(1, 1, 4);
  std::vector<double> s{1.0}, a{2.0};
  buf.push(s, a, 0.0, s, false);
  s[0] = -1.0;
  a[0] = 0.5;
  buf.push(s, a, 0.0, s, false);
  std::vector<size_t> idx{0, 1};
  BatchView batch = gather_batch(buf, idx);

  MlpScratch scratch;
  std::vector<double> y(2);
  for (size_t e = 0; e < 2; ++e) y[e] = c1.q(batch.row_s(e), batch.row_a(e), scratch);

  Tape t;
  auto b1 = c1.bind(t), b2 = c2.bind(t);
  NodeId loss = build_td_loss(t, c1, b1, c2, b2, batch, y);
  CHECK(t.value(loss) == 0.0);
}

TEST_CASE("td loss matches a hand-computed two-transition MSE") {
  CriticNetwork c1(1, 1, {}), c2(1, 1, {});
  c1.params().entry(0)[0] = 0.5;
  c1.params().entry(0)[1] = -0.25;
  c1.params().entry(1)[0] = 0.1;
  c2.params().entry(0)[0] = -0.3;
  c2.params().entry(0)[1] = 0.8;
  c2.params().entry(1)[0] = -0.2;

  ReplayBuffer buf(1, 1, 4);
  std::vector<double> s{1.0}, a{2.0};
  buf.push(s, a, 0.0, s, false);
  s[0] = -1.0;
  a[0] = 0.5;
  buf.push(s, a, 0.0, s, false);
  std::vector<size_t> idx{0, 1};
  BatchView batch = gather_batch(buf, idx);
  std::vector<double> y{0.7, -0.3};

  // scalar arithmetic oracle for Q = w_s s + w_a a + b
  auto q = [](double ws, double wa, double b, double sv, double av) { return ws * sv + wa * av + b; };
  double expect = 0.0;
  expect += std::pow(q(0.5, -0.25, 0.1, 1.0, 2.0) - 0.7, 2);
  expect += std::pow(q(-0.3, 0.8, -0.2, 1.0, 2.0) - 0.7, 2);
  expect += std::pow(q(0.5, -0.25, 0.1, -1.0, 0.5) + 0.3, 2);
  expect += std::pow(q(-0.3, 0.8, -0.2, -1.0, 0.5) + 0.3, 2);
  expect /= 2.0;

  Tape t;
  auto b1 = c1.bind(t), b2 = c2.bind(t);
  NodeId loss = build_td_loss(t, c1, b1, c2, b2, batch, y);
  CHECK(t.value(loss) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("zero-weight regularizers reproduce the base update bitwise") {
  TD3Config cfg = small_cfg();
  TD3Agent base(2, 1, 2.0, cfg, 1234);
  TD3Agent pave(2, 1, 2.0, cfg, 1234);
  PaveHyperParams hp;
  hp.lambda1 = hp.lambda2 = hp.lambda3 = 0.0;
  pave.set_aux_provider(make_pave_provider(hp));  // empty: zero weights drop the terms

  fill_buffer(base, 64, 7, 2, 1);
  fill_buffer(pave, 64, 7, 2, 1);
  for (int i = 0; i < 10; ++i) {
    base.update();
    pave.update();
  }
  CHECK(params_equal(base.critic1().params(), pave.critic1().params()));
  CHECK(params_equal(base.critic2().params(), pave.critic2().params()));
  CHECK(params_equal(base.actor().params(), pave.actor().params()));
}

TEST_CASE("mixed-partial term is inert on a linear critic") {
  // a critic without hidden layers has a state-independent action gradient
  TD3Config cfg = small_cfg();
  cfg.hidden = {};
  TD3Agent base(2, 1, 2.0, cfg, 77);
  TD3Agent pave(2, 1, 2.0, cfg, 77);
  PaveHyperParams hp;
  hp.lambda1 = 2.0;
  hp.lambda2 = 0.0;
  hp.lambda3 = 0.0;
  pave.set_aux_provider(make_pave_provider(hp));

  fill_buffer(base, 64, 8, 2, 1);
  fill_buffer(pave, 64, 8, 2, 1);
  for (int i = 0; i < 8; ++i) {
    base.update();
    UpdateStats st = pave.update();
    CHECK(st.l_mpr == 0.0);
  }
  CHECK(params_equal(base.critic1().params(), pave.critic1().params()));
  CHECK(params_equal(base.actor().params(), pave.actor().params()));
}

TEST_CASE("one small gradient step decreases the total loss on a frozen batch") {
  Rng rng(21);
  CriticNetwork critic(2, 1, {10, 10});
  critic.init_uniform(rng);

  ReplayBuffer buf(2, 1, 16);
  std::vector<double> s(2), a(1), sn(2);
  for (int i = 0; i < 8; ++i) {
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    for (double& x : a) x = rng.uniform(-2.0, 2.0);
    for (double& x : sn) x = rng.uniform(-1.0, 1.0);
    buf.push(s, a, rng.uniform(-1.0, 0.0), sn, false);
  }
  std::vector<size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  BatchView batch = gather_batch(buf, idx);
  std::vector<double> y(batch.count, -0.5);

  Tape t;
  auto bound = critic.bind(t);
  NodeId td = build_td_loss(t, critic, bound, critic, bound, batch, y);
  Rng pert(3), rad_rng(4);
  NodeId mpr = mpr_loss(t, critic, bound, batch, 0.05, pert);
  NodeId vfc = vfc_loss(t, critic, bound, batch);
  RademacherBatch rad = sample_rademacher(1, int(batch.count), rad_rng);
  NodeId curv = curv_loss(t, critic, bound, batch, 0.1, rad);
  PaveHyperParams hp;
  hp.lambda1 = 2.0;
  hp.lambda2 = 0.005;
  hp.lambda3 = 2.0;
  NodeId loss = total_loss(t, td, mpr, vfc, curv, hp);

  double before = t.value(loss);
  ParamVector g = param_gradient(t, loss, bound, critic.mlp());
  const double lr = 1e-4;
  for (size_t i = 0; i < g.size(); ++i) critic.params().flat()[i] -= lr * g.flat()[i];
  t.forward_all();
  double after = t.value(loss);
  CHECK(after < before);
}

TEST_CASE("actor ascends a concave quadratic toward its peak") {
  // Q(s, a) = -|a|^2: the greedy action is zero everywhere
  Rng rng(17);
  ActorNetwork actor(2, 2, {8, 8}, 2.0);
  actor.init_uniform(rng);

  std::vector<std::vector<double>> states;
  for (int i = 0; i < 8; ++i) states.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});

  auto mean_action_norm = [&] {
    MlpScratch scratch;
    std::vector<double> a(2);
    double acc = 0.0;
    for (const auto& s : states) {
      actor.act(s, a, scratch);
      acc += a[0] * a[0] + a[1] * a[1];
    }
    return acc / double(states.size());
  };

  double before = mean_action_norm();
  // one plain gradient step on mean(-Q) = mean(|a|^2)
  ParamVector grad(std::vector<ParamShape>(actor.params().layout()));
  for (const auto& s : states) {
    Tape t;
    auto bound = actor.bind(t);
    NodeId sid = t.input(2);
    t.set_input(sid, s);
    NodeId a = actor.build_action(t, bound, sid);
    NodeId loss = t.dot(a, a);
    ParamVector g = param_gradient(t, loss, bound, actor.mlp());
    for (size_t i = 0; i < g.size(); ++i) grad.flat()[i] += g.flat()[i] / double(states.size());
  }
  for (size_t i = 0; i < grad.size(); ++i) actor.params().flat()[i] -= 0.05 * grad.flat()[i];
  CHECK(mean_action_norm() < before);
}

TEST_CASE("zero learning rate leaves the actor unchanged") {
  TD3Config cfg = small_cfg();
  cfg.actor_lr = 0.0;
  cfg.policy_delay = 1;
  TD3Agent agent(2, 1, 2.0, cfg, 3);
  fill_buffer(agent, 64, 5, 2, 1);
  ParamVector before = agent.actor().params();
  agent.update();
  CHECK(params_equal(before, agent.actor().params()));
}

TEST_CASE("actor gradient matches finite differences of the mean value") {
  TD3Config cfg = small_cfg();
  TD3Agent agent(2, 1, 2.0, cfg, 55);
  fill_buffer(agent, 32, 6, 2, 1);
  Rng rng(1);
  std::vector<size_t> idx = agent.replay().sample_indices(8, rng);
  BatchView batch = gather_batch(agent.replay(), idx);

  ParamVector grad = agent.actor_gradient(batch);

  // independent route: fast-path evaluation of mean(-Q1(s, pi(s)))
  auto objective = [&] {
    MlpScratch scratch;
    std::vector<double> a(1);
    double acc = 0.0;
    for (size_t e = 0; e < batch.count; ++e) {
      agent.actor().act(batch.row_s(e), a, scratch);
      acc -= agent.critic1().q(batch.row_s(e), a, scratch);
    }
    return acc / double(batch.count);
  };

  Rng pick(77);
  for (int trial = 0; trial < 40; ++trial) {
    size_t i = pick.uniform_int(agent.actor().params().size());
    double* slot = agent.actor().params().data() + i;
    double orig = *slot;
    *slot = orig + 1e-5;
    double fp = objective();
    *slot = orig - 1e-5;
    double fm = objective();
    *slot = orig;
    double fd = (fp - fm) / 2e-5;
    CHECK(std::fabs(grad.flat()[i] - fd) <= 1e-9 + 1e-4 * std::fabs(fd));
  }
}

TEST_CASE("soft update interpolates parameters") {
  ParamVector target({{1, 1}});
  ParamVector online({{1, 1}});
  target.flat()[0] = 0.0;
  online.flat()[0] = 2.0;

  ParamVector t1 = target;
  TD3Agent::soft_update(t1, online, 1.0);
  CHECK(t1.flat()[0] == 2.0);

  ParamVector t2 = target;
  TD3Agent::soft_update(t2, online, 0.0);
  CHECK(t2.flat()[0] == 0.0);

  ParamVector t3 = target;
  TD3Agent::soft_update(t3, online, 0.5);
  CHECK(t3.flat()[0] == 1.0);

  ParamVector bad({{2, 1}});
  CHECK_THROWS_AS(TD3Agent::soft_update(bad, online, 0.5), std::invalid_argument);
}

TEST_CASE("actor gradients ignore the critic regularizers") {
  TD3Config cfg = small_cfg();
  TD3Agent a1(2, 1, 2.0, cfg, 42);
  TD3Agent a2(2, 1, 2.0, cfg, 42);
  PaveHyperParams hp;  // non-zero weights
  a2.set_aux_provider(make_pave_provider(hp));

  fill_buffer(a1, 32, 4, 2, 1);
  fill_buffer(a2, 32, 4, 2, 1);
  Rng rng(10);
  std::vector<size_t> idx = a1.replay().sample_indices(8, rng);
  BatchView b1 = gather_batch(a1.replay(), idx);
  BatchView b2 = gather_batch(a2.replay(), idx);

  // identical frozen critics by construction (same master seed, no updates)
  ParamVector g1 = a1.actor_gradient(b1);
  ParamVector g2 = a2.actor_gradient(b2);
  CHECK(params_equal(g1, g2));
}

TEST_CASE("serial and parallel updates are bitwise identical") {
  TD3Config serial_cfg = small_cfg();
  serial_cfg.parallel_update = false;
  TD3Config parallel_cfg = small_cfg();
  parallel_cfg.parallel_update = true;

#ifdef _OPENMP
  omp_set_num_threads(3);
#endif
  TD3Agent s_agent(2, 1, 2.0, serial_cfg, 321);
  TD3Agent p_agent(2, 1, 2.0, parallel_cfg, 321);
  PaveHyperParams hp;
  s_agent.set_aux_provider(make_pave_provider(hp));
  p_agent.set_aux_provider(make_pave_provider(hp));
  fill_buffer(s_agent, 48, 2, 2, 1);
  fill_buffer(p_agent, 48, 2, 2, 1);
  for (int i = 0; i < 6; ++i) {
    s_agent.update();
    p_agent.update();
  }
  CHECK(params_equal(s_agent.critic1().params(), p_agent.critic1().params()));
  CHECK(params_equal(s_agent.critic2().params(), p_agent.critic2().params()));
  CHECK(params_equal(s_agent.actor().params(), p_agent.actor().params()));
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("checkpoints round trip through disk") {
  TD3Config cfg = small_cfg();
  TD3Agent agent(3, 1, 2.0, cfg, 11);
  fill_buffer(agent, 64, 3, 3, 1);
  for (int i = 0; i < 5; ++i) agent.update();
  agent.save_checkpoint("agent_ckpt.bin", 5000, 0xabcdef);

  TD3Agent restored(3, 1, 2.0, cfg, 999);
  TD3Agent::CheckpointInfo info = restored.load_checkpoint("agent_ckpt.bin");
  CHECK(info.step == 5000);
  CHECK(info.config_hash == 0xabcdef);
  CHECK(params_equal(agent.actor().params(), restored.actor().params()));
  CHECK(params_equal(agent.critic1().params(), restored.critic1().params()));
  CHECK(params_equal(agent.targets().critic2.params(), restored.targets().critic2.params()));

  TD3Config other = cfg;
  other.hidden = {4};
  TD3Agent wrong(3, 1, 2.0, other, 1);
  CHECK_THROWS(wrong.load_checkpoint("agent_ckpt.bin"));
}

TEST_CASE("config validation rejects bad ranges") {
  TD3Config cfg = small_cfg();
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_cfg();
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_cfg();
  cfg.policy_delay = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
