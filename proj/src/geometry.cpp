#include "pave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pave {

Mat Mat::transposed() const {
  Mat t(cols, rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double Mat::frobenius_norm() const {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::vector<double> matvec(const Mat& m, std::span<const double> x) {
  if (x.size() != size_t(m.cols)) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(size_t(m.rows), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < m.cols; ++c) acc += m(r, c) * x[size_t(c)];
    y[size_t(r)] = acc;
  }
  return y;
}

std::vector<double> mat_t_vec(const Mat& m, std::span<const double> x) {
  if (x.size() != size_t(m.rows)) throw std::invalid_argument("mat_t_vec: dimension mismatch");
  std::vector<double> y(size_t(m.cols), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) y[size_t(c)] += m(r, c) * x[size_t(r)];
  }
  return y;
}

std::vector<double> jacobi_eigenvalues(const Mat& sym) {
  if (sym.rows != sym.cols) throw std::invalid_argument("jacobi: matrix must be square");
  int n = sym.rows;
  Mat a = sym;

  double scale = 0.0;
  for (double x : a.v) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0) return std::vector<double>(size_t(n), 0.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) < 1e-14 * scale * n) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
      }
    }
  }

  std::vector<double> eig(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) eig[size_t(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double spectral_norm(const Mat& m) {
  int n = m.cols;
  if (n == 0 || m.rows == 0) return 0.0;
  double scale = 0.0;
  for (double x : m.v) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0) return 0.0;

  std::vector<double> z(size_t(n), 1.0 / std::sqrt(double(n)));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> w = mat_t_vec(m, matvec(m, z));  // M^T M z
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    double next = 0.0;
    for (size_t i = 0; i < w.size(); ++i) next += z[i] * w[i];  // Rayleigh quotient
    for (size_t i = 0; i < w.size(); ++i) z[i] = w[i] / norm;
    if (it > 0 && std::fabs(next - lambda) < 1e-10 * std::max(1.0, std::fabs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

std::vector<double> solve_spd(const Mat& a, std::span<const double> b) {
  if (a.rows != a.cols || b.size() != size_t(a.rows)) {
    throw std::invalid_argument("solve_spd: dimension mismatch");
  }
  int n = a.rows;
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = a(i, j);
      for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      if (i == j) {
        if (acc <= 0.0) throw std::invalid_argument("solve_spd: matrix not positive definite");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }
  std::vector<double> y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double acc = b[size_t(i)];
    for (int k = 0; k < i; ++k) acc -= l(i, k) * y[size_t(k)];
    y[size_t(i)] = acc / l(i, i);
  }
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    double acc = y[size_t(i)];
    for (int k = i + 1; k < n; ++k) acc -= l(k, i) * x[size_t(k)];
    x[size_t(i)] = acc / l(i, i);
  }
  return x;
}

double QuadraticCritic::q(std::span<const double> s, std::span<const double> a) const {
  int k = state_dim(), d = action_dim();
  if (s.size() != size_t(k) || a.size() != size_t(d)) {
    throw std::invalid_argument("QuadraticCritic: dimension mismatch");
  }
  double out = c;
  for (int i = 0; i < k; ++i) out += g_s[size_t(i)] * s[size_t(i)];
  for (int i = 0; i < d; ++i) out += g_a[size_t(i)] * a[size_t(i)];
  std::vector<double> as = matvec(A, s);
  for (int i = 0; i < k; ++i) out += 0.5 * s[size_t(i)] * as[size_t(i)];
  std::vector<double> ba = matvec(B, a);
  for (int i = 0; i < k; ++i) out += s[size_t(i)] * ba[size_t(i)];
  std::vector<double> ca = matvec(C, a);
  for (int i = 0; i < d; ++i) out += 0.5 * a[size_t(i)] * ca[size_t(i)];
  return out;
}

std::vector<double> QuadraticCritic::action_grad(std::span<const double> s,
                                                 std::span<const double> a) const {
  // grad_a Q = g_a + B's + C a
  std::vector<double> g = mat_t_vec(B, s);
  std::vector<double> ca = matvec(C, a);
  for (size_t i = 0; i < g.size(); ++i) g[i] += g_a[i] + ca[i];
  return g;
}

bool QuadraticCritic::is_concave(double* lambda_max) const {
  std::vector<double> eig = jacobi_eigenvalues(C);
  double lmax = eig.empty() ? 0.0 : eig.back();
  if (lambda_max != nullptr) *lambda_max = lmax;
  return lmax < 0.0;
}

QuadraticCritic QuadraticCritic::random(int k, int d, Rng& rng) {
  QuadraticCritic qc;
  qc.c = rng.uniform(-1.0, 1.0);
  qc.g_s.resize(static_cast<size_t>(k));
  qc.g_a.resize(static_cast<size_t>(d));
  for (double& x : qc.g_s) x = rng.uniform(-1.0, 1.0);
  for (double& x : qc.g_a) x = rng.uniform(-1.0, 1.0);
  qc.A = Mat(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double x = rng.uniform(-1.0, 1.0);
      qc.A(i, j) = x;
      qc.A(j, i) = x;
    }
  }
  qc.B = Mat(k, d);
  for (double& x : qc.B.v) x = rng.uniform(-2.0, 2.0);
  // C = -(R R' + eps I): negative definite by construction
  Mat r(d, d);
  for (double& x : r.v) x = rng.uniform(-1.0, 1.0);
  qc.C = Mat(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int l = 0; l < d; ++l) acc += r(i, l) * r(j, l);
      qc.C(i, j) = -acc;
    }
    qc.C(i, i) -= 0.3;
  }
  return qc;
}

QuadraticCritic QuadraticCritic::bilinear(const Mat& b) {
  QuadraticCritic qc;
  qc.g_s.assign(size_t(b.rows), 0.0);
  qc.g_a.assign(size_t(b.cols), 0.0);
  qc.A = Mat(b.rows, b.rows);
  qc.B = b;
  qc.C = Mat(b.cols, b.cols);
  return qc;
}

std::vector<double> optimal_action(const QuadraticCritic& qc, std::span<const double> s) {
  double lmax = 0.0;
  if (!qc.is_concave(&lmax)) {
    throw std::invalid_argument("optimal_action: action Hessian is not negative definite");
  }
  // (-C) a = g_a + B's, with -C symmetric positive definite
  std::vector<double> rhs = mat_t_vec(qc.B, s);
  for (size_t i = 0; i < rhs.size(); ++i) rhs[i] += qc.g_a[i];
  Mat negc = qc.C;
  for (double& x : negc.v) x = -x;
  return solve_spd(negc, rhs);
}

JacobianReport implicit_policy_jacobian(const QuadraticCritic& qc, std::span<const double> s) {
  double lmax = 0.0;
  if (!qc.is_concave(&lmax)) {
    throw std::invalid_argument("implicit_policy_jacobian: action Hessian is not negative definite");
  }
  (void)s;  // quadratic critics have state-independent Hessian blocks
  int k = qc.state_dim(), d = qc.action_dim();
  Mat negc = qc.C;
  for (double& x : negc.v) x = -x;

  // J = -C^{-1} B': solve (-C) J_col = (B')_col per state axis
  Mat bt = qc.B.transposed();  // d x k
  JacobianReport rep;
  rep.J = Mat(d, k);
  std::vector<double> col(static_cast<size_t>(d));
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) col[size_t(i)] = bt(i, j);
    std::vector<double> x = solve_spd(negc, col);
    for (int i = 0; i < d; ++i) rep.J(i, j) = x[size_t(i)];
  }
  rep.M = spectral_norm(bt);
  rep.mu = std::fabs(lmax);
  rep.bound = rep.M / rep.mu;
  rep.J_norm = spectral_norm(rep.J);
  return rep;
}

LipschitzReport lipschitz_bound_check(const QuadraticCritic& qc, int n_pairs, double radius, Rng& rng) {
  JacobianReport jac = implicit_policy_jacobian(qc, std::vector<double>(size_t(qc.state_dim()), 0.0));
  LipschitzReport rep;
  rep.bound = jac.bound;
  rep.pairs = n_pairs;
  int k = qc.state_dim();
  std::vector<double> s1(static_cast<size_t>(k)), s2(static_cast<size_t>(k));
  for (int p = 0; p < n_pairs; ++p) {
    for (int i = 0; i < k; ++i) {
      s1[size_t(i)] = rng.uniform(-radius, radius);
      s2[size_t(i)] = rng.uniform(-radius, radius);
    }
    std::vector<double> a1 = optimal_action(qc, s1);
    std::vector<double> a2 = optimal_action(qc, s2);
    double da = 0.0, ds = 0.0;
    for (size_t i = 0; i < a1.size(); ++i) da += (a1[i] - a2[i]) * (a1[i] - a2[i]);
    for (size_t i = 0; i < s1.size(); ++i) ds += (s1[i] - s2[i]) * (s1[i] - s2[i]);
    if (ds == 0.0) continue;
    double ratio = std::sqrt(da) / std::sqrt(ds);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > rep.bound * (1.0 + 1e-8)) ++rep.violations;
  }
  return rep;
}

double QuadraticField::q(std::span<const double> s, std::span<const double> a) const {
  return qc_.q(s, a);
}

void QuadraticField::action_grad(std::span<const double> s, std::span<const double> a,
                                 std::span<double> out) const {
  std::vector<double> g = qc_.action_grad(s, a);
  std::copy(g.begin(), g.end(), out.begin());
}

double NetworkField::q(std::span<const double> s, std::span<const double> a) const {
  MlpScratch scratch;
  return net_->q(s, a, scratch);
}

void NetworkField::action_grad(std::span<const double> s, std::span<const double> a,
                               std::span<double> out) const {
  MlpScratch scratch;
  net_->action_grad(s, a, out, scratch);
}

double LandscapeGrid::mean() const {
  double acc = 0.0;
  for (double x : values.v) acc += x;
  return values.v.empty() ? 0.0 : acc / double(values.v.size());
}

double LandscapeGrid::max() const {
  double m = 0.0;
  for (double x : values.v) m = std::max(m, x);
  return m;
}

namespace {

// |grad_a Q(s + eps e_i, a) - grad_a Q(s, a)| / eps for one grid point
double mixed_partial_norm(const CriticField& field, std::span<const double> s,
                          std::span<const double> a, int state_axis, double fd_eps,
                          std::vector<double>& g0, std::vector<double>& g1,
                          std::vector<double>& sp) {
  sp.assign(s.begin(), s.end());
  field.action_grad(s, a, g0);
  sp[size_t(state_axis)] += fd_eps;
  field.action_grad(sp, a, g1);
  double acc = 0.0;
  for (size_t i = 0; i < g0.size(); ++i) {
    double d = (g1[i] - g0[i]) / fd_eps;
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

LandscapeGrid mixed_partial_landscape(const CriticField& field, std::span<const double> s0,
                                      std::span<const double> a0, int state_axis, int action_axis,
                                      const LandscapeOptions& opt) {
  int k = field.state_dim(), d = field.action_dim();
  if (state_axis < 0 || state_axis >= k || action_axis < 0 || action_axis >= d) {
    throw std::invalid_argument("mixed_partial_landscape: axis out of range");
  }
  if (opt.grid_n < 2) throw std::invalid_argument("mixed_partial_landscape: grid too small");

  LandscapeGrid grid;
  grid.state_axis = state_axis;
  grid.action_axis = action_axis;
  grid.clip = opt.clip;
  grid.state_values.resize(size_t(opt.grid_n));
  grid.action_values.resize(size_t(opt.grid_n));
  for (int i = 0; i < opt.grid_n; ++i) {
    double t = double(i) / double(opt.grid_n - 1);
    grid.state_values[size_t(i)] =
        opt.state_range.first + t * (opt.state_range.second - opt.state_range.first);
    grid.action_values[size_t(i)] =
        opt.action_range.first + t * (opt.action_range.second - opt.action_range.first);
  }
  grid.values = Mat(opt.grid_n, opt.grid_n);

  auto row_worker = [&](int r) {
    std::vector<double> s(s0.begin(), s0.end());
    std::vector<double> a(a0.begin(), a0.end());
    std::vector<double> g0(static_cast<size_t>(d)), g1(static_cast<size_t>(d)), sp;
    s[size_t(state_axis)] = grid.state_values[size_t(r)];
    for (int c = 0; c < opt.grid_n; ++c) {
      a[size_t(action_axis)] = grid.action_values[size_t(c)];
      double val = mixed_partial_norm(field, s, a, state_axis, opt.fd_eps, g0, g1, sp);
      grid.values(r, c) = std::min(val, opt.clip);
    }
  };

  if (opt.parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < opt.grid_n; ++r) row_worker(r);
  } else {
    for (int r = 0; r < opt.grid_n; ++r) row_worker(r);
  }
  return grid;
}

std::pair<int, int> dominant_axis_selection(const CriticField& field, std::span<const double> s0,
                                            std::span<const double> a0, double fd_eps) {
  int k = field.state_dim(), d = field.action_dim();
  std::vector<double> g0(static_cast<size_t>(d)), g1(static_cast<size_t>(d));
  std::vector<double> sp(s0.begin(), s0.end());
  field.action_grad(s0, a0, g0);

  std::pair<int, int> best{0, 0};
  double best_mag = -1.0;
  for (int i = 0; i < k; ++i) {
    sp.assign(s0.begin(), s0.end());
    sp[size_t(i)] += fd_eps;
    field.action_grad(sp, a0, g1);
    for (int j = 0; j < d; ++j) {
      double mag = std::fabs((g1[size_t(j)] - g0[size_t(j)]) / fd_eps);
      if (mag > best_mag) {
        best_mag = mag;
        best = {i, j};
      }
    }
  }
  return best;
}

void write_landscape_csv(const std::string& path, const LandscapeGrid& grid) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_landscape_csv: cannot open " + path);
  os << std::setprecision(17);
  os << "state\\action";
  for (double a : grid.action_values) os << ',' << a;
  os << "\n";
  for (size_t r = 0; r < grid.state_values.size(); ++r) {
    os << grid.state_values[r];
    for (size_t c = 0; c < grid.action_values.size(); ++c) {
      os << ',' << grid.values(int(r), int(c));
    }
    os << "\n";
  }
}

NodeId build_quadratic_on_tape(Tape& t, const QuadraticCritic& qc, NodeId s, NodeId a) {
  int k = qc.state_dim(), d = qc.action_dim();
  NodeId gs = t.constant(qc.g_s, uint32_t(k));
  NodeId ga = t.constant(qc.g_a, uint32_t(d));
  NodeId an = t.constant(qc.A.v, uint32_t(k), uint32_t(k));
  NodeId bn = t.constant(qc.B.v, uint32_t(k), uint32_t(d));
  NodeId cn = t.constant(qc.C.v, uint32_t(d), uint32_t(d));
  NodeId half = t.constant(0.5);
  NodeId out = t.add(t.constant(qc.c), t.add(t.dot(gs, s), t.dot(ga, a)));
  out = t.add(out, t.scale(half, t.dot(s, t.matvec(an, s))));
  out = t.add(out, t.dot(s, t.matvec(bn, a)));
  out = t.add(out, t.scale(half, t.dot(a, t.matvec(cn, a))));
  return out;
}

}  // namespace pave
