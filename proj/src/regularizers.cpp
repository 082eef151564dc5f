#include "pave/regularizers.hpp"

#include <memory>
#include <stdexcept>

namespace pave {

void PaveHyperParams::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) {
    throw std::invalid_argument("PaveHyperParams: weights must be nonnegative");
  }
  if (sigma < 0.0) throw std::invalid_argument("PaveHyperParams: sigma must be nonnegative");
  if (delta <= 0.0) throw std::invalid_argument("PaveHyperParams: delta must be positive");
  if (n_rademacher < 1) throw std::invalid_argument("PaveHyperParams: n_rademacher must be >= 1");
}

RademacherBatch sample_rademacher(int d, int n, Rng& rng) {
  if (d < 1 || n < 1) throw std::invalid_argument("sample_rademacher: d and n must be >= 1");
  RademacherBatch out;
  out.d = d;
  out.n = n;
  out.v.resize(size_t(d) * n);
  for (double& x : out.v) x = rng.rademacher();
  return out;
}

NodeId mpr_term(ElementContext& ctx, std::span<const double> eps) {
  Tape& t = ctx.tape;
  if (eps.size() != ctx.s.size()) throw std::invalid_argument("mpr_term: perturbation size mismatch");
  std::vector<double> s_pert(ctx.s.begin(), ctx.s.end());
  for (size_t i = 0; i < eps.size(); ++i) s_pert[i] += eps[i];
  NodeId sp = t.input(uint32_t(s_pert.size()));
  t.set_input(sp, s_pert);
  NodeId g1 = ctx.critic.action_gradient(t, ctx.bound, sp, ctx.a_node);
  NodeId g2 = ctx.critic.action_gradient(t, ctx.bound, ctx.s_node, ctx.a_node);
  NodeId d = t.sub(g1, g2);
  return t.dot(d, d);
}

NodeId vfc_term(ElementContext& ctx) {
  Tape& t = ctx.tape;
  NodeId sn = t.input(uint32_t(ctx.s_next.size()));
  t.set_input(sn, ctx.s_next);
  NodeId g1 = ctx.critic.action_gradient(t, ctx.bound, ctx.s_node, ctx.a_node);
  NodeId g2 = ctx.critic.action_gradient(t, ctx.bound, sn, ctx.a_node);
  NodeId d = t.sub(g1, g2);
  return t.dot(d, d);
}

NodeId curv_term(ElementContext& ctx, std::span<const double> v_block, int n, double delta,
                 double eps_fd) {
  Tape& t = ctx.tape;
  size_t d = ctx.a.size();
  if (v_block.size() != d * size_t(n)) throw std::invalid_argument("curv_term: sign block size mismatch");
  NodeId acc = t.constant(0.0);
  NodeId margin = t.constant(delta);
  for (int i = 0; i < n; ++i) {
    std::span<const double> v = v_block.subspan(size_t(i) * d, d);
    NodeId hvp = ctx.critic.hvp_action(t, ctx.bound, ctx.s_node, ctx.a, v, eps_fd);
    NodeId v_node = t.constant(v, uint32_t(d));
    NodeId quad = t.dot(v_node, hvp);  // v' H v
    NodeId hinge = t.relu(t.add(quad, margin));
    acc = t.add(acc, hinge);
  }
  return n == 1 ? acc : t.mul(acc, t.constant(1.0 / double(n)));
}

namespace {

NodeId batch_mean(Tape& t, std::span<const NodeId> terms) {
  NodeId acc = t.constant(0.0);
  for (NodeId id : terms) acc = t.add(acc, id);
  return t.mul(acc, t.constant(1.0 / double(terms.size())));
}

ElementContext make_ctx(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                        const BatchView& batch, size_t e, NodeId s_node, NodeId a_node) {
  return ElementContext{t,       critic,          bound,           s_node,
                        a_node,  batch.row_s(e),  batch.row_a(e),  batch.row_sn(e), e};
}

}  // namespace

NodeId mpr_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                const BatchView& batch, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("mpr_loss: sigma must be nonnegative");
  if (batch.count == 0) throw std::invalid_argument("mpr_loss: empty batch");
  std::vector<NodeId> terms;
  std::vector<double> eps(size_t(batch.k));
  for (size_t e = 0; e < batch.count; ++e) {
    for (double& x : eps) x = rng.normal(0.0, sigma);
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(batch.k), uint32_t(batch.k));
    NodeId a_node = t.leaf(batch.a.data() + e * size_t(batch.d), uint32_t(batch.d));
    ElementContext ctx = make_ctx(t, critic, bound, batch, e, s_node, a_node);
    terms.push_back(mpr_term(ctx, eps));
  }
  return batch_mean(t, terms);
}

NodeId vfc_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                const BatchView& batch) {
  if (batch.count == 0) throw std::invalid_argument("vfc_loss: empty batch");
  std::vector<NodeId> terms;
  for (size_t e = 0; e < batch.count; ++e) {
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(batch.k), uint32_t(batch.k));
    NodeId a_node = t.leaf(batch.a.data() + e * size_t(batch.d), uint32_t(batch.d));
    ElementContext ctx = make_ctx(t, critic, bound, batch, e, s_node, a_node);
    terms.push_back(vfc_term(ctx));
  }
  return batch_mean(t, terms);
}

NodeId curv_loss(Tape& t, const CriticNetwork& critic, const Mlp::Bound& bound,
                 const BatchView& batch, double delta, const RademacherBatch& rad) {
  if (delta <= 0.0) throw std::invalid_argument("curv_loss: delta must be positive");
  if (batch.count == 0) throw std::invalid_argument("curv_loss: empty batch");
  if (rad.d != batch.d || size_t(rad.n) % batch.count != 0) {
    throw std::invalid_argument("curv_loss: sign batch does not tile the batch");
  }
  int per_element = rad.n / int(batch.count);
  std::vector<NodeId> terms;
  for (size_t e = 0; e < batch.count; ++e) {
    NodeId s_node = t.leaf(batch.s.data() + e * size_t(batch.k), uint32_t(batch.k));
    NodeId a_node = t.leaf(batch.a.data() + e * size_t(batch.d), uint32_t(batch.d));
    ElementContext ctx = make_ctx(t, critic, bound, batch, e, s_node, a_node);
    std::span<const double> block{rad.v.data() + e * size_t(per_element) * batch.d,
                                  size_t(per_element) * batch.d};
    terms.push_back(curv_term(ctx, block, per_element, delta));
  }
  return batch_mean(t, terms);
}

NodeId total_loss(Tape& t, NodeId td, NodeId mpr, NodeId vfc, NodeId curv,
                  const PaveHyperParams& hp) {
  NodeId out = td;
  out = t.add(out, t.mul(t.constant(hp.lambda1), mpr));
  out = t.add(out, t.mul(t.constant(hp.lambda2), vfc));
  out = t.add(out, t.mul(t.constant(hp.lambda3), curv));
  return out;
}

AuxProvider make_pave_provider(const PaveHyperParams& hp) {
  hp.validate();
  if (hp.all_zero()) return {};
  return [hp](const BatchView& batch, Rng& perturbation, Rng& rademacher) {
    std::vector<WeightedAux> out;
    if (hp.lambda1 > 0.0) {
      auto eps = std::make_shared<std::vector<double>>(batch.count * size_t(batch.k));
      for (double& x : *eps) x = perturbation.normal(0.0, hp.sigma);
      int k = batch.k;
      out.push_back({"mpr", hp.lambda1, [eps, k](ElementContext& ctx) {
                       return mpr_term(ctx, {eps->data() + ctx.element * size_t(k), size_t(k)});
                     }});
    }
    if (hp.lambda2 > 0.0) {
      out.push_back({"vfc", hp.lambda2, [](ElementContext& ctx) { return vfc_term(ctx); }});
    }
    if (hp.lambda3 > 0.0) {
      auto v = std::make_shared<std::vector<double>>(batch.count * size_t(hp.n_rademacher) *
                                                     size_t(batch.d));
      for (double& x : *v) x = rademacher.rademacher();
      int d = batch.d;
      int n = hp.n_rademacher;
      double delta = hp.delta;
      out.push_back({"curv", hp.lambda3, [v, d, n, delta](ElementContext& ctx) {
                       std::span<const double> block{
                           v->data() + ctx.element * size_t(n) * size_t(d), size_t(n) * size_t(d)};
                       return curv_term(ctx, block, n, delta);
                     }});
    }
    return out;
  };
}

}  // namespace pave
