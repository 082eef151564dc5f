#include "pave/checks.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <sstream>

#include "pave/geometry.hpp"
#include "pave/metrics.hpp"
#include "pave/regularizers.hpp"
#include "pave/replay.hpp"
#include "pave/rng.hpp"
#include "pave/td3.hpp"

namespace pave {

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt_detail(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

QuadraticCritic nth_random_critic(Rng& rng, int* k_out = nullptr, int* d_out = nullptr) {
  int k = 1 + int(rng.uniform_int(8));
  int d = 1 + int(rng.uniform_int(8));
  if (k_out) *k_out = k;
  if (d_out) *d_out = d;
  return QuadraticCritic::random(k, d, rng);
}

Mat fd_argmax_jacobian(const QuadraticCritic& qc, std::span<const double> s, double h) {
  int k = qc.state_dim(), d = qc.action_dim();
  Mat j(d, k);
  std::vector<double> sp(s.begin(), s.end()), sm(s.begin(), s.end());
  for (int c = 0; c < k; ++c) {
    sp.assign(s.begin(), s.end());
    sm.assign(s.begin(), s.end());
    sp[size_t(c)] += h;
    sm[size_t(c)] -= h;
    std::vector<double> ap = optimal_action(qc, sp);
    std::vector<double> am = optimal_action(qc, sm);
    for (int r = 0; r < d; ++r) j(r, c) = (ap[size_t(r)] - am[size_t(r)]) / (2.0 * h);
  }
  return j;
}

}  // namespace

CheckResult check_jacobian_oracle() {
  Timer timer;
  CheckResult res;
  res.name = "implicit policy jacobian vs finite-difference argmax (100 random critics)";
  Rng rng(0x4a31);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    QuadraticCritic qc = nth_random_critic(rng);
    std::vector<double> s(static_cast<size_t>(qc.state_dim()));
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    JacobianReport rep = implicit_policy_jacobian(qc, s);
    Mat fd = fd_argmax_jacobian(qc, s, 1e-5);
    for (int r = 0; r < rep.J.rows; ++r) {
      for (int c = 0; c < rep.J.cols; ++c) {
        double denom = std::max({std::fabs(rep.J(r, c)), std::fabs(fd(r, c)), 1e-6});
        worst = std::max(worst, std::fabs(rep.J(r, c) - fd(r, c)) / denom);
      }
    }
  }
  res.seconds = timer.seconds();
  res.pass = worst < 1e-5;
  res.detail = "max rel err " + fmt_detail(worst);
  return res;
}

CheckResult check_lipschitz_bound() {
  Timer timer;
  CheckResult res;
  res.name = "lipschitz bound: zero violations and scalar tightness";
  Rng rng(0x4a31);  // same instances as the jacobian check
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    QuadraticCritic qc = nth_random_critic(rng);
    LipschitzReport rep = lipschitz_bound_check(qc, 1000, 2.0, rng);
    violations += rep.violations;
  }
  double worst_gap = 0.0;
  Rng srng(0x77aa);
  for (int trial = 0; trial < 25; ++trial) {
    QuadraticCritic qc = QuadraticCritic::random(1, 1, srng);
    LipschitzReport rep = lipschitz_bound_check(qc, 1000, 2.0, srng);
    worst_gap = std::max(worst_gap, std::fabs(rep.max_ratio - rep.bound) / rep.bound);
  }
  res.seconds = timer.seconds();
  res.pass = violations == 0 && worst_gap < 1e-10;
  res.detail = std::to_string(violations) + " violations, scalar gap " + fmt_detail(worst_gap);
  return res;
}

CheckResult check_perturbation_identity() {
  Timer timer;
  CheckResult res;
  res.name = "perturbation Monte Carlo recovers the squared coupling norm";
  Rng rng(0x88);
  double worst = 0.0;
  const double sigma = 1e-3;
  for (int rep = 0; rep < 3; ++rep) {
    Mat b(4, 3);
    for (double& x : b.v) x = rng.uniform(-2.0, 2.0);
    // scale so the coupling norm lands in [1, 10]
    double target = 1.0 + 9.0 * rng.uniform01();
    double scale = target / b.frobenius_norm();
    for (double& x : b.v) x *= scale;

    std::vector<double> eps(4);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      for (double& x : eps) x = rng.normal(0.0, sigma);
      std::vector<double> bte = mat_t_vec(b, eps);
      double term = 0.0;
      for (double x : bte) term += x * x;
      acc += term;
    }
    double mc = acc / double(n) / (sigma * sigma);
    double expect = b.frobenius_norm() * b.frobenius_norm();
    worst = std::max(worst, std::fabs(mc - expect) / expect);
  }
  res.seconds = timer.seconds();
  res.pass = worst < 0.02;
  res.detail = "max rel dev " + fmt_detail(worst);
  return res;
}

CheckResult check_trace_estimator() {
  Timer timer;
  CheckResult res;
  res.name = "sign-vector trace estimation: exhaustive small dims, sampled d=8";
  Rng rng(0x99);
  bool ok = true;
  double worst_exact = 0.0;
  for (int d = 1; d <= 4; ++d) {
    Mat h(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        double x = rng.uniform(-2.0, 2.0);
        h(i, j) = x;
        h(j, i) = x;
      }
    }
    double trace = 0.0;
    for (int i = 0; i < d; ++i) trace += h(i, i);
    double mean = 0.0;
    std::vector<double> v(static_cast<size_t>(d));
    for (int mask = 0; mask < (1 << d); ++mask) {
      for (int j = 0; j < d; ++j) v[size_t(j)] = (mask >> j) & 1 ? 1.0 : -1.0;
      std::vector<double> hv = matvec(h, v);
      double quad = 0.0;
      for (int j = 0; j < d; ++j) quad += v[size_t(j)] * hv[size_t(j)];
      mean += quad;
    }
    mean /= double(1 << d);
    double err = std::fabs(mean - trace) / std::max(1.0, std::fabs(trace));
    worst_exact = std::max(worst_exact, err);
    ok = ok && err <= 1e-12;
  }

  const int d = 8, n = 10000;
  Mat h(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double x = rng.uniform(-2.0, 2.0);
      h(i, j) = x;
      h(j, i) = x;
    }
  }
  double trace = 0.0;
  for (int i = 0; i < d; ++i) trace += h(i, i);
  RademacherBatch rad = sample_rademacher(d, n, rng);
  std::vector<double> samples(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    std::span<const double> v = rad.vec(i);
    std::vector<double> hv = matvec(h, v);
    double quad = 0.0;
    for (int j = 0; j < d; ++j) quad += v[size_t(j)] * hv[size_t(j)];
    samples[size_t(i)] = quad;
    mean += quad;
  }
  mean /= double(n);
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= double(n - 1);
  double se = std::sqrt(var / double(n));
  bool sampled_ok = std::fabs(mean - trace) < 3.0 * se;

  res.seconds = timer.seconds();
  res.pass = ok && sampled_ok;
  res.detail = "exhaustive err " + fmt_detail(worst_exact) + ", sampled |dev|/se " +
               fmt_detail(se > 0 ? std::fabs(mean - trace) / se : 0.0);
  return res;
}

CheckResult check_second_order_gradients() {
  Timer timer;
  CheckResult res;
  res.name = "regularizer parameter gradients vs central finite differences";
  Rng rng(0xaa);
  CriticNetwork critic(3, 2, {10, 10});
  critic.init_uniform(rng);

  ReplayBuffer buf(3, 2, 8);
  std::vector<double> s(3), a(2), sn(3);
  for (int i = 0; i < 4; ++i) {
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    for (double& x : a) x = rng.uniform(-2.0, 2.0);
    for (double& x : sn) x = rng.uniform(-1.0, 1.0);
    buf.push(s, a, 0.0, sn, false);
  }
  std::vector<size_t> idx{0, 1, 2, 3};
  BatchView batch = gather_batch(buf, idx);

  Tape t;
  auto bound = critic.bind(t);
  Rng pert(0xab), rad_rng(0xac);
  NodeId mpr = mpr_loss(t, critic, bound, batch, 0.1, pert);
  NodeId vfc = vfc_loss(t, critic, bound, batch);
  RademacherBatch rad = sample_rademacher(2, int(batch.count), rad_rng);
  NodeId curv = curv_loss(t, critic, bound, batch, 0.5, rad);

  double worst = 0.0;
  for (NodeId loss : {mpr, vfc, curv}) {
    ParamVector g = param_gradient(t, loss, bound, critic.mlp());
    Rng pick(0xad);
    for (int trial = 0; trial < 50; ++trial) {
      size_t i = pick.uniform_int(critic.params().size());
      double* slot = critic.params().data() + i;
      double orig = *slot;
      *slot = orig + 1e-5;
      t.forward_all();
      double fp = t.value(loss);
      *slot = orig - 1e-5;
      t.forward_all();
      double fm = t.value(loss);
      *slot = orig;
      t.forward_all();
      double fd = (fp - fm) / 2e-5;
      double err = std::fabs(g.flat()[i] - fd) / std::max({std::fabs(fd), std::fabs(g.flat()[i]), 1e-5});
      worst = std::max(worst, err);
    }
  }
  res.seconds = timer.seconds();
  res.pass = worst < 1e-4;
  res.detail = "max rel err " + fmt_detail(worst);
  return res;
}

CheckResult check_fft() {
  Timer timer;
  CheckResult res;
  res.name = "radix-2 transform vs quadratic-time reference and energy identity";
  Rng rng(0xfe);
  const double two_pi = 6.283185307179586476925286766559;
  double worst = 0.0, worst_parseval = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(64);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    auto fast = fft_real(x);
    for (size_t k = 0; k < 64; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (size_t n = 0; n < 64; ++n) {
        double ang = -two_pi * double(k) * double(n) / 64.0;
        acc += x[n] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      worst = std::max(worst, std::abs(fast[k] - acc));
    }
    double te = 0.0, fe = 0.0;
    for (double v : x) te += v * v;
    for (const auto& c : fast) fe += std::norm(c);
    fe /= double(fast.size());
    worst_parseval = std::max(worst_parseval, std::fabs(te - fe) / te);
  }
  res.seconds = timer.seconds();
  res.pass = worst < 1e-9 && worst_parseval < 1e-9;
  res.detail = "max abs err " + fmt_detail(worst) + ", parseval rel " + fmt_detail(worst_parseval);
  return res;
}

CheckResult check_cost_accounting() {
  Timer timer;
  CheckResult res;
  res.name = "input-gradient evaluations per update follow the linear accounting";
  bool ok = true;
  std::string detail;
  for (int dims : {3, 8, 16}) {
    TD3Config cfg;
    cfg.hidden = {6};
    cfg.batch_size = 4;
    cfg.buffer_capacity = 64;
    TD3Agent agent(dims, dims, 1.0, cfg, uint64_t(dims));
    PaveHyperParams hp;
    hp.n_rademacher = 1;
    agent.set_aux_provider(make_pave_provider(hp));
    Rng rng(uint64_t(dims) + 1);
    std::vector<double> s(static_cast<size_t>(dims)), a(static_cast<size_t>(dims)),
        sn(static_cast<size_t>(dims));
    for (int i = 0; i < 16; ++i) {
      for (double& x : s) x = rng.uniform(-1.0, 1.0);
      for (double& x : a) x = rng.uniform(-1.0, 1.0);
      for (double& x : sn) x = rng.uniform(-1.0, 1.0);
      agent.observe(s, a, -0.1, sn, false);
    }
    UpdateStats stats = agent.update();
    long expected = (2 + 2 + 2 * hp.n_rademacher) * cfg.batch_size * 2;  // per twin critic
    ok = ok && stats.input_grad_evals == expected;
    detail += "k=d=" + std::to_string(dims) + ":" + std::to_string(stats.input_grad_evals) + " ";
  }
  res.seconds = timer.seconds();
  res.pass = ok;
  res.detail = detail + "(expected 48 each)";
  return res;
}

std::vector<CheckResult> run_fast_oracle_checks() {
  return {
      check_jacobian_oracle(),      check_lipschitz_bound(), check_perturbation_identity(),
      check_trace_estimator(),      check_second_order_gradients(),
      check_fft(),                  check_cost_accounting(),
  };
}

}  // namespace pave
