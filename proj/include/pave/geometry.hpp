#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pave/network.hpp"
#include "pave/rng.hpp"
#include "pave/tape.hpp"

namespace pave {

// Row-major dense matrix, sized for the small problems handled here.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(size_t(r) * c, 0.0) {}
  double& operator()(int r, int c) { return v[size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return v[size_t(r) * cols + c]; }
  Mat transposed() const;
  double frobenius_norm() const;
};

std::vector<double> matvec(const Mat& m, std::span<const double> x);
std::vector<double> mat_t_vec(const Mat& m, std::span<const double> x);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(const Mat& sym);

// Largest singular value via power iteration on M^T M; 200 iterations or a
// relative change below 1e-10, whichever comes first.
double spectral_norm(const Mat& m);

// Solve A x = b for symmetric positive definite A (Cholesky).
std::vector<double> solve_spd(const Mat& a, std::span<const double> b);

// Q(s, a) = c + g_s.s + g_a.a + 0.5 s'As + s'Ba + 0.5 a'Ca with A, C symmetric.
// The closed-form companion of the learned critic: its Hessian blocks are
// exact, which makes it the oracle for the Jacobian and Lipschitz checks.
struct QuadraticCritic {
  double c = 0.0;
  std::vector<double> g_s, g_a;
  Mat A, B, C;  // A: k x k, B: k x d, C: d x d

  int state_dim() const { return A.rows; }
  int action_dim() const { return C.rows; }

  double q(std::span<const double> s, std::span<const double> a) const;
  std::vector<double> action_grad(std::span<const double> s, std::span<const double> a) const;

  // Negative definiteness of C; largest eigenvalue strictly below zero.
  bool is_concave(double* lambda_max = nullptr) const;

  static QuadraticCritic random(int k, int d, Rng& rng);           // C negative definite
  static QuadraticCritic bilinear(const Mat& b);                   // Q = s'Ba
};

// a*(s) = argmax_a Q(s, a) = -C^{-1} (g_a + B's); requires C negative definite.
std::vector<double> optimal_action(const QuadraticCritic& qc, std::span<const double> s);

struct JacobianReport {
  Mat J;          // d x k sensitivity of the optimal action
  double M = 0;   // spectral norm of the mixed state-action Hessian
  double mu = 0;  // |largest eigenvalue| of the action Hessian
  double bound = 0;   // M / mu
  double J_norm = 0;  // spectral norm of J
};

JacobianReport implicit_policy_jacobian(const QuadraticCritic& qc, std::span<const double> s);

struct LipschitzReport {
  double bound = 0;      // M / mu
  double max_ratio = 0;  // max |a*(s) - a*(s')| / |s - s'| observed
  int violations = 0;    // pairs exceeding bound * (1 + 1e-8)
  int pairs = 0;
};

LipschitzReport lipschitz_bound_check(const QuadraticCritic& qc, int n_pairs, double radius, Rng& rng);

// Value plus action-gradient access; the probe operations accept trained
// networks and analytic quadratics through this one interface.
class CriticField {
 public:
  virtual ~CriticField() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double q(std::span<const double> s, std::span<const double> a) const = 0;
  virtual void action_grad(std::span<const double> s, std::span<const double> a,
                           std::span<double> out) const = 0;
};

class QuadraticField final : public CriticField {
 public:
  explicit QuadraticField(QuadraticCritic qc) : qc_(std::move(qc)) {}
  int state_dim() const override { return qc_.state_dim(); }
  int action_dim() const override { return qc_.action_dim(); }
  double q(std::span<const double> s, std::span<const double> a) const override;
  void action_grad(std::span<const double> s, std::span<const double> a,
                   std::span<double> out) const override;

 private:
  QuadraticCritic qc_;
};

class NetworkField final : public CriticField {
 public:
  explicit NetworkField(const CriticNetwork& net) : net_(&net) {}
  int state_dim() const override { return net_->state_dim(); }
  int action_dim() const override { return net_->action_dim(); }
  double q(std::span<const double> s, std::span<const double> a) const override;
  void action_grad(std::span<const double> s, std::span<const double> a,
                   std::span<double> out) const override;

 private:
  const CriticNetwork* net_;
};

struct LandscapeGrid {
  int state_axis = 0, action_axis = 0;
  std::vector<double> state_values;   // grid rows
  std::vector<double> action_values;  // grid columns
  Mat values;                         // clipped mixed-partial norms
  double clip = 300.0;

  double mean() const;
  double max() const;
};

struct LandscapeOptions {
  std::pair<double, double> state_range{-1.0, 1.0};
  std::pair<double, double> action_range{-1.5, 1.5};
  int grid_n = 41;
  double fd_eps = 1e-3;
  double clip = 300.0;
  bool parallel = true;  // OpenMP over grid rows; serial path kept for testing
};

// Sweep one state axis against one action axis around a reference point and
// record |grad_a Q(s + eps e_i, a) - grad_a Q(s, a)| / eps, clipped.
LandscapeGrid mixed_partial_landscape(const CriticField& field, std::span<const double> s0,
                                      std::span<const double> a0, int state_axis, int action_axis,
                                      const LandscapeOptions& opt);

// Scan all (state, action) axis pairs at the reference point and return the
// pair with the largest finite-difference mixed-partial magnitude. Ties break
// toward the lexicographically smallest pair.
std::pair<int, int> dominant_axis_selection(const CriticField& field, std::span<const double> s0,
                                            std::span<const double> a0, double fd_eps = 1e-3);

// CSV with the action-axis values as the header row and the state-axis value
// leading each body row.
void write_landscape_csv(const std::string& path, const LandscapeGrid& grid);

// Express the quadratic on a tape (constants for the coefficient blocks);
// lets autodiff results be compared against the closed forms above.
NodeId build_quadratic_on_tape(Tape& t, const QuadraticCritic& qc, NodeId s, NodeId a);

}  // namespace pave
