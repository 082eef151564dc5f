#pragma once

#include <span>
#include <vector>

#include "pave/network.hpp"
#include "pave/replay.hpp"
#include "pave/rng.hpp"
#include "pave/tape.hpp"
#include "pave/td3.hpp"

namespace pave {

struct PaveHyperParams {
  double lambda1 = 2.0;    // mixed-partial weight
  double lambda2 = 0.005;  // vector-field consistency weight
  double lambda3 = 2.0;    // curvature hinge weight
  double sigma = 0.05;     // state perturbation scale
  double delta = 0.1;      // curvature margin
  int n_rademacher = 1;    // sign vectors per batch element

  bool all_zero() const { return lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0; }
  void validate() const;
};

struct RademacherBatch {
  int d = 0;
  int n = 0;
  std::vector<double> v;  // n blocks of d entries, each +-1

  std::span<const double> vec(int i) const { return {v.data() + size_t(i) * d, size_t(d)}; }
};

RademacherBatch sample_rademacher(int d, int n, Rng& rng);

// Per-element terms, built on the caller's tape so the hinge and the squared
// norms stay differentiable in the critic parameters.

// |grad_a Q(s + eps, a) - grad_a Q(s, a)|^2
NodeId mpr_term(ElementContext& ctx, std::span<const double> eps);

// |grad_a Q(s, a) - grad_a Q(s', a)|^2, gradients flowing into both terms
NodeId vfc_term(ElementContext& ctx);

// mean over sign vectors of max(0, v' H v + delta), H the action Hessian
// realized by the central-difference Hessian-vector product
NodeId curv_term(ElementContext& ctx, std::span<const double> v_block, int n, double delta,
                 double eps_fd = kHvpFdStep);

// Batch-level constructors (mean over elements on one tape).
NodeId mpr_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                const BatchView& batch, double sigma, Rng& rng);
NodeId vfc_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                const BatchView& batch);
NodeId curv_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                 const BatchView& batch, double delta, const RademacherBatch& rad);

// td + lambda1 mpr + lambda2 vfc + lambda3 curv
NodeId total_loss(Tape& t, NodeId td, NodeId mpr, NodeId vfc, NodeId curv,
                  const PaveHyperParams& hp);

// The plug for the critic update: draws fresh perturbations and sign vectors
// per batch and returns one weighted builder per active term. Terms with a
// zero weight are omitted entirely, which keeps the all-zero configuration on
// the unmodified base code path.
AuxProvider make_pave_provider(const PaveHyperParams& hp);

}  // namespace pave
