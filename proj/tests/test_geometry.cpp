#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pave/geometry.hpp"
#include "pave/rng.hpp"

using namespace pave;

namespace {

// finite-difference Jacobian of the exact argmax, column by column
Mat fd_optimal_action_jacobian(const QuadraticCritic& qc, std::span<const double> s, double h) {
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

QuadraticCritic scalar_case() {
  QuadraticCritic qc;
  qc.g_s = {0.0};
  qc.g_a = {0.0};
  qc.A = Mat(1, 1);
  qc.B = Mat(1, 1);
  qc.B(0, 0) = 4.0;
  qc.C = Mat(1, 1);
  qc.C(0, 0) = -2.0;
  return qc;
}

}  // namespace

TEST_CASE("jacobi eigenvalues on a known symmetric matrix") {
  Mat m(2, 2);
  m(0, 0) = 2.0; m(0, 1) = 1.0;
  m(1, 0) = 1.0; m(1, 1) = 2.0;
  std::vector<double> eig = jacobi_eigenvalues(m);
  CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("spectral norm of the identity is one") {
  Mat m(3, 3);
  for (int i = 0; i < 3; ++i) m(i, i) = 1.0;
  CHECK(spectral_norm(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral norm picks the largest singular value of a diagonal") {
  Mat m(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = -5.0;
  CHECK(spectral_norm(m) == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("spectral norm matches the eigensolver route on random matrices") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    Mat m(4, 3);
    for (double& x : m.v) x = rng.uniform(-2.0, 2.0);
    // oracle: sqrt of the largest eigenvalue of M^T M via Jacobi rotations
    Mat mtm(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int r = 0; r < 4; ++r) acc += m(r, i) * m(r, j);
        mtm(i, j) = acc;
      }
    }
    double expect = std::sqrt(jacobi_eigenvalues(mtm).back());
    CHECK(spectral_norm(m) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("spectral norm of the zero matrix is zero") {
  Mat m(3, 2);
  CHECK(spectral_norm(m) == 0.0);
}

TEST_CASE("optimal action is zero when the critic has no coupling or drift") {
  QuadraticCritic qc = scalar_case();
  qc.B(0, 0) = 0.0;
  std::vector<double> s{1.7};
  std::vector<double> a = optimal_action(qc, s);
  CHECK(a[0] == 0.0);
}

TEST_CASE("scalar optimal action solves -2a + 4s = 0") {
  QuadraticCritic qc = scalar_case();
  std::vector<double> s{0.8};
  std::vector<double> a = optimal_action(qc, s);
  CHECK(a[0] == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("optimal action is a stationary point of the action gradient") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int k = 1 + int(rng.uniform_int(5));
    int d = 1 + int(rng.uniform_int(5));
    QuadraticCritic qc = QuadraticCritic::random(k, d, rng);
    std::vector<double> s(static_cast<size_t>(k));
    for (double& x : s) x = rng.uniform(-2.0, 2.0);
    std::vector<double> a = optimal_action(qc, s);
    std::vector<double> g = qc.action_grad(s, a);
    for (double x : g) CHECK(std::fabs(x) < 1e-10);
  }
}

TEST_CASE("indefinite action Hessians are rejected") {
  QuadraticCritic qc = scalar_case();
  qc.C(0, 0) = 0.5;
  std::vector<double> s{0.0};
  CHECK_THROWS_AS(optimal_action(qc, s), std::invalid_argument);
  CHECK_THROWS_AS(implicit_policy_jacobian(qc, s), std::invalid_argument);
}

TEST_CASE("policy jacobian vanishes without state-action coupling") {
  QuadraticCritic qc = scalar_case();
  qc.B(0, 0) = 0.0;
  std::vector<double> s{0.3};
  JacobianReport rep = implicit_policy_jacobian(qc, s);
  CHECK(rep.J(0, 0) == 0.0);
  CHECK(rep.M == 0.0);
}

TEST_CASE("scalar policy jacobian equals 2 and matches finite differences") {
  QuadraticCritic qc = scalar_case();
  std::vector<double> s{0.25};
  JacobianReport rep = implicit_policy_jacobian(qc, s);
  CHECK(rep.J(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep.M == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.bound == doctest::Approx(2.0).epsilon(1e-12));

  Mat fd = fd_optimal_action_jacobian(qc, s, 1e-5);
  CHECK(std::fabs(fd(0, 0) - rep.J(0, 0)) < 1e-6);
}

TEST_CASE("policy jacobian matches the finite-difference argmax jacobian") {
  Rng rng(202);
  for (int trial = 0; trial < 25; ++trial) {
    int k = 2 + int(rng.uniform_int(2));  // includes the 3 x 2 case
    int d = 2;
    QuadraticCritic qc = QuadraticCritic::random(k, d, rng);
    std::vector<double> s(static_cast<size_t>(k));
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    JacobianReport rep = implicit_policy_jacobian(qc, s);
    Mat fd = fd_optimal_action_jacobian(qc, s, 1e-5);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < k; ++c) {
        double denom = std::max({std::fabs(rep.J(r, c)), std::fabs(fd(r, c)), 1e-6});
        CHECK(std::fabs(rep.J(r, c) - fd(r, c)) / denom < 1e-5);
      }
    }
    CHECK(rep.J_norm <= rep.bound * (1.0 + 1e-10));
  }
}

TEST_CASE("lipschitz ratio is zero without coupling") {
  QuadraticCritic qc = scalar_case();
  qc.B(0, 0) = 0.0;
  Rng rng(5);
  LipschitzReport rep = lipschitz_bound_check(qc, 100, 2.0, rng);
  CHECK(rep.max_ratio == 0.0);
  CHECK(rep.violations == 0);
}

TEST_CASE("scalar lipschitz ratio attains the bound exactly") {
  QuadraticCritic qc = scalar_case();
  Rng rng(6);
  LipschitzReport rep = lipschitz_bound_check(qc, 500, 3.0, rng);
  CHECK(rep.violations == 0);
  CHECK(std::fabs(rep.max_ratio - rep.bound) / rep.bound < 1e-10);
}

TEST_CASE("no bound violations across random critics") {
  Rng rng(31337);
  for (int trial = 0; trial < 30; ++trial) {
    int k = 1 + int(rng.uniform_int(8));
    int d = 1 + int(rng.uniform_int(8));
    QuadraticCritic qc = QuadraticCritic::random(k, d, rng);
    LipschitzReport rep = lipschitz_bound_check(qc, 200, 2.0, rng);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio <= rep.bound * (1.0 + 1e-8));
  }
}

TEST_CASE("bilinear landscape is constant at the coupling norm") {
  Mat b(2, 2);
  b(0, 0) = 1.0; b(0, 1) = -2.0;
  b(1, 0) = 0.5; b(1, 1) = 0.0;
  QuadraticField field(QuadraticCritic::bilinear(b));
  std::vector<double> s0{0.0, 0.0}, a0{0.0, 0.0};
  LandscapeOptions opt;
  opt.grid_n = 9;
  int axis = 0;
  LandscapeGrid grid = mixed_partial_landscape(field, s0, a0, axis, 1, opt);
  double expect = std::sqrt(1.0 + 4.0);  // |row 0 of B|
  for (double v : grid.values.v) CHECK(v == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("landscape of a state-independent critic is all zeros") {
  QuadraticCritic qc;
  qc.g_s = {0.0, 0.0};
  qc.g_a = {0.3};
  qc.A = Mat(2, 2);
  qc.B = Mat(2, 1);
  qc.C = Mat(1, 1);
  qc.C(0, 0) = -1.0;
  QuadraticField field(qc);
  std::vector<double> s0{0.0, 0.0}, a0{0.0};
  LandscapeOptions opt;
  opt.grid_n = 7;
  LandscapeGrid grid = mixed_partial_landscape(field, s0, a0, 1, 0, opt);
  for (double v : grid.values.v) CHECK(v == 0.0);
}

TEST_CASE("landscape values never exceed the clip") {
  Mat b(1, 1);
  b(0, 0) = 1234.5;
  QuadraticField field(QuadraticCritic::bilinear(b));
  std::vector<double> s0{0.0}, a0{0.0};
  LandscapeOptions opt;
  opt.grid_n = 5;
  opt.clip = 300.0;
  LandscapeGrid grid = mixed_partial_landscape(field, s0, a0, 0, 0, opt);
  for (double v : grid.values.v) {
    CHECK(v <= opt.clip);
    CHECK(v == doctest::Approx(300.0));
  }
}

TEST_CASE("serial and parallel landscape sweeps agree bitwise") {
  Rng rng(99);
  QuadraticCritic qc = QuadraticCritic::random(3, 2, rng);
  QuadraticField field(qc);
  std::vector<double> s0{0.1, -0.2, 0.3}, a0{0.0, 0.4};
  LandscapeOptions opt;
  opt.grid_n = 11;
  opt.parallel = false;
  LandscapeGrid serial = mixed_partial_landscape(field, s0, a0, 1, 0, opt);
  opt.parallel = true;
  LandscapeGrid parallel = mixed_partial_landscape(field, s0, a0, 1, 0, opt);
  for (size_t i = 0; i < serial.values.v.size(); ++i) {
    CHECK(serial.values.v[i] == parallel.values.v[i]);
  }
}

TEST_CASE("dominant axis finds the only nonzero coupling") {
  Mat b(3, 2);
  b(1, 0) = 2.5;
  QuadraticField field(QuadraticCritic::bilinear(b));
  std::vector<double> s0{0.0, 0.0, 0.0}, a0{0.0, 0.0};
  CHECK(dominant_axis_selection(field, s0, a0) == std::pair<int, int>{1, 0});
}

TEST_CASE("dominant axis tie-breaks to the first pair for flat critics") {
  QuadraticCritic qc;
  qc.g_s = {0.0, 0.0};
  qc.g_a = {0.0};
  qc.A = Mat(2, 2);
  qc.B = Mat(2, 1);
  qc.C = Mat(1, 1);
  qc.C(0, 0) = -1.0;
  QuadraticField field(qc);
  std::vector<double> s0{0.2, 0.3}, a0{0.1};
  CHECK(dominant_axis_selection(field, s0, a0) == std::pair<int, int>{0, 0});
}

TEST_CASE("dominant axis matches the brute-force argmax of |B|") {
  Rng rng(777);
  for (int trial = 0; trial < 15; ++trial) {
    int k = 2 + int(rng.uniform_int(4));
    int d = 1 + int(rng.uniform_int(3));
    QuadraticCritic qc = QuadraticCritic::random(k, d, rng);
    QuadraticField field(qc);
    std::vector<double> s0(static_cast<size_t>(k), 0.1), a0(static_cast<size_t>(d), -0.1);
    std::pair<int, int> got = dominant_axis_selection(field, s0, a0);
    std::pair<int, int> expect{0, 0};
    double best = -1.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < d; ++j) {
        if (std::fabs(qc.B(i, j)) > best) {
          best = std::fabs(qc.B(i, j));
          expect = {i, j};
        }
      }
    }
    CHECK(got == expect);
  }
}

TEST_CASE("network critics run through the same landscape interface") {
  Rng rng(12);
  CriticNetwork net(3, 1, {8, 8});
  net.init_uniform(rng);
  NetworkField field(net);
  std::vector<double> s0{0.0, 0.0, 0.0}, a0{0.0};
  LandscapeOptions opt;
  opt.grid_n = 7;
  LandscapeGrid grid = mixed_partial_landscape(field, s0, a0, 0, 0, opt);
  CHECK(grid.values.rows == 7);
  CHECK(grid.values.cols == 7);
  for (double v : grid.values.v) {
    CHECK(v >= 0.0);
    CHECK(v <= opt.clip);
  }
  std::pair<int, int> axes = dominant_axis_selection(field, s0, a0);
  CHECK(axes.first >= 0);
  CHECK(axes.first < 3);
  CHECK(axes.second == 0);
}

TEST_CASE("on-tape quadratic gradients match the closed form") {
  Rng rng(55);
  QuadraticCritic qc = QuadraticCritic::random(3, 2, rng);
  std::vector<double> s{0.4, -0.2, 0.9}, a{0.3, -0.6};
  Tape t;
  NodeId sid = t.input(3), aid = t.input(2);
  t.set_input(sid, s);
  t.set_input(aid, a);
  NodeId q = build_quadratic_on_tape(t, qc, sid, aid);
  CHECK(t.value(q) == doctest::Approx(qc.q(s, a)).epsilon(1e-13));
  NodeId g = t.backward1(q, aid);
  std::vector<double> expect = qc.action_grad(s, a);
  auto gv = t.values(g);
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(gv[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }
}
