#pragma once

#include <span>
#include <vector>

#include "pave/params.hpp"
#include "pave/rng.hpp"
#include "pave/tape.hpp"

namespace pave {

// Finite-difference step for Hessian-vector products along actions.
inline constexpr double kHvpFdStep = 1e-3;

// Scratch buffers reused across fast-path evaluations.
struct MlpScratch {
  std::vector<double> pre;   // pre-activations, all layers back to back
  std::vector<double> act;   // activations, all layers back to back
  std::vector<double> delta; // backward workspace
};

// Dense multi-layer perceptron with SiLU hidden activations and a linear
// output layer. Parameters live in a ParamVector laid out as W0,b0,W1,b1,...
// The network can be evaluated directly (fast path) or built onto a Tape
// when gradients of gradients are required.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in_dim, std::vector<int> hidden, int out_dim);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int layers() const { return static_cast<int>(dims_.size()) - 1; }

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_uniform(Rng& rng);

  struct Bound {
    std::vector<NodeId> ids;  // leaf node per layout entry
  };
  Bound bind(Tape& t) const;
  NodeId forward(Tape& t, const Bound& b, NodeId x) const;

  void eval(std::span<const double> x, std::span<double> out, MlpScratch& s) const;

  // Fast input gradient for scalar-output networks; also returns the value.
  double eval_scalar_grad(std::span<const double> x, std::span<double> grad_x, MlpScratch& s) const;

 private:
  int in_dim_ = 0, out_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<int> dims_;  // in, hidden..., out
  ParamVector params_;
};

// Scalar action-value network Q(s, a) over concatenated inputs. SiLU hidden
// activations keep the function twice continuously differentiable, so the
// first and second derivatives used by the regularizers exist everywhere.
class CriticNetwork {
 public:
  CriticNetwork() = default;
  CriticNetwork(int state_dim, int action_dim, std::vector<int> hidden);

  int state_dim() const { return k_; }
  int action_dim() const { return d_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  ParamVector& params() { return mlp_.params(); }
  const ParamVector& params() const { return mlp_.params(); }
  void init_uniform(Rng& rng) { mlp_.init_uniform(rng); }

  double q(std::span<const double> s, std::span<const double> a, MlpScratch& scratch) const;
  // d/da Q(s, a) without a tape; used by rollout-time probes.
  double action_grad(std::span<const double> s, std::span<const double> a,
                     std::span<double> grad_a, MlpScratch& scratch) const;

  Mlp::Bound bind(Tape& t) const { return mlp_.bind(t); }
  NodeId build_q(Tape& t, const Mlp::Bound& b, NodeId s, NodeId a) const;

  // d/da Q as a graph node, so losses of it stay differentiable in the
  // parameters. Each call records one input-gradient evaluation.
  NodeId action_gradient(Tape& t, const Mlp::Bound& b, NodeId s, NodeId a) const;

  // Central finite difference of exact action-gradients along v:
  // (grad_a Q(s, a + eps v) - grad_a Q(s, a - eps v)) / (2 eps).
  // Records two input-gradient evaluations; v with zero norm yields a
  // constant zero vector.
  NodeId hvp_action(Tape& t, const Mlp::Bound& b, NodeId s, std::span<const double> a,
                    std::span<const double> v, double eps_fd = kHvpFdStep) const;

 private:
  int k_ = 0, d_ = 0;
  Mlp mlp_;
};

// Deterministic policy network mapping states into the action box via a
// scaled tanh squash.
class ActorNetwork {
 public:
  ActorNetwork() = default;
  ActorNetwork(int state_dim, int action_dim, std::vector<int> hidden, double action_bound);

  int state_dim() const { return k_; }
  int action_dim() const { return d_; }
  double action_bound() const { return bound_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  ParamVector& params() { return mlp_.params(); }
  const ParamVector& params() const { return mlp_.params(); }
  void init_uniform(Rng& rng) { mlp_.init_uniform(rng); }

  void act(std::span<const double> s, std::span<double> a, MlpScratch& scratch) const;

  Mlp::Bound bind(Tape& t) const { return mlp_.bind(t); }
  NodeId build_action(Tape& t, const Mlp::Bound& b, NodeId s) const;

 private:
  int k_ = 0, d_ = 0;
  double bound_ = 1.0;
  Mlp mlp_;
};

// Reverse-mode parameter gradient of a scalar loss node. Entries without a
// path to the loss come back as zeros.
ParamVector param_gradient(Tape& t, NodeId loss, const Mlp::Bound& bound, const Mlp& net);

}  // namespace pave
