#include "pave/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pave {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_grad(double x) {
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace

Mlp::Mlp(int in_dim, std::vector<int> hidden, int out_dim)
    : in_dim_(in_dim), out_dim_(out_dim), hidden_(std::move(hidden)) {
  if (in_dim <= 0 || out_dim <= 0) throw std::invalid_argument("Mlp: dims must be positive");
  for (int h : hidden_) {
    if (h <= 0) throw std::invalid_argument("Mlp: hidden sizes must be positive");
  }
  dims_.push_back(in_dim_);
  for (int h : hidden_) dims_.push_back(h);
  dims_.push_back(out_dim_);

  std::vector<ParamShape> layout;
  for (int l = 0; l < layers(); ++l) {
    layout.push_back({uint32_t(dims_[l + 1]), uint32_t(dims_[l])});  // W
    layout.push_back({uint32_t(dims_[l + 1]), 1});                   // b
  }
  params_ = ParamVector(std::move(layout));
}

void Mlp::init_uniform(Rng& rng) {
  for (int l = 0; l < layers(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    for (double& w : params_.entry(size_t(2 * l))) w = rng.uniform(-bound, bound);
    for (double& b : params_.entry(size_t(2 * l + 1))) b = rng.uniform(-bound, bound);
  }
}

Mlp::Bound Mlp::bind(Tape& t) const {
  Bound b;
  b.ids.reserve(params_.entries());
  for (size_t i = 0; i < params_.entries(); ++i) {
    const ParamShape& s = params_.layout()[i];
    b.ids.push_back(t.leaf(params_.data() + params_.offset(i), s.rows, s.cols));
  }
  return b;
}

NodeId Mlp::forward(Tape& t, const Bound& b, NodeId x) const {
  if (t.rows(x) != uint32_t(in_dim_) || t.cols(x) != 1) {
    throw std::invalid_argument("Mlp: input dimension mismatch");
  }
  NodeId h = x;
  for (int l = 0; l < layers(); ++l) {
    NodeId z = t.add(t.matvec(b.ids[size_t(2 * l)], h), b.ids[size_t(2 * l + 1)]);
    h = (l + 1 < layers()) ? t.silu(z) : z;
  }
  return h;
}

void Mlp::eval(std::span<const double> x, std::span<double> out, MlpScratch& s) const {
  if (x.size() != size_t(in_dim_)) throw std::invalid_argument("Mlp: input dimension mismatch");
  if (out.size() != size_t(out_dim_)) throw std::invalid_argument("Mlp: output dimension mismatch");
  size_t maxw = 0;
  for (int d : dims_) maxw = std::max(maxw, size_t(d));
  s.pre.resize(maxw);
  s.act.resize(maxw);
  std::memcpy(s.act.data(), x.data(), x.size() * sizeof(double));

  for (int l = 0; l < layers(); ++l) {
    const double* W = params_.data() + params_.offset(size_t(2 * l));
    const double* b = params_.data() + params_.offset(size_t(2 * l + 1));
    int rows = dims_[l + 1], cols = dims_[l];
    // accumulate the product first, bias last: matches the tape kernels bit for bit
    for (int r = 0; r < rows; ++r) {
      const double* wr = W + size_t(r) * cols;
      double acc = 0.0;
      for (int c = 0; c < cols; ++c) acc += wr[c] * s.act[size_t(c)];
      s.pre[size_t(r)] = acc + b[r];
    }
    bool last = (l + 1 == layers());
    for (int r = 0; r < rows; ++r) s.act[size_t(r)] = last ? s.pre[size_t(r)] : silu(s.pre[size_t(r)]);
  }
  std::memcpy(out.data(), s.act.data(), out.size() * sizeof(double));
}

double Mlp::eval_scalar_grad(std::span<const double> x, std::span<double> grad_x, MlpScratch& s) const {
  if (out_dim_ != 1) throw std::invalid_argument("Mlp: eval_scalar_grad needs scalar output");
  if (x.size() != size_t(in_dim_) || grad_x.size() != size_t(in_dim_)) {
    throw std::invalid_argument("Mlp: input dimension mismatch");
  }
  // forward, keeping pre-activations and activations of every layer
  size_t total = 0;
  for (int l = 0; l <= layers(); ++l) total += size_t(dims_[l]);
  s.pre.resize(total);
  s.act.resize(total);
  size_t maxw = 0;
  for (int d : dims_) maxw = std::max(maxw, size_t(d));
  s.delta.resize(2 * maxw);

  std::memcpy(s.act.data(), x.data(), x.size() * sizeof(double));
  size_t off = 0;
  for (int l = 0; l < layers(); ++l) {
    const double* W = params_.data() + params_.offset(size_t(2 * l));
    const double* b = params_.data() + params_.offset(size_t(2 * l + 1));
    int rows = dims_[l + 1], cols = dims_[l];
    const double* in = s.act.data() + off;
    double* pre = s.pre.data() + off + size_t(cols);
    double* act = s.act.data() + off + size_t(cols);
    for (int r = 0; r < rows; ++r) {
      const double* wr = W + size_t(r) * cols;
      double acc = 0.0;
      for (int c = 0; c < cols; ++c) acc += wr[c] * in[c];
      pre[r] = acc + b[r];
    }
    bool last = (l + 1 == layers());
    for (int r = 0; r < rows; ++r) act[r] = last ? pre[r] : silu(pre[r]);
    off += size_t(cols);
  }
  double q = s.act[off];  // single output

  // backward: delta starts as d(out)/d(pre_last) = 1
  double* cur = s.delta.data();
  double* nxt = s.delta.data() + maxw;
  cur[0] = 1.0;
  size_t layer_off = off;  // offset of the current layer's input inside act/pre
  for (int l = layers() - 1; l >= 0; --l) {
    const double* W = params_.data() + params_.offset(size_t(2 * l));
    int rows = dims_[l + 1], cols = dims_[l];
    layer_off -= size_t(cols);
    // propagate through the weight matrix
    for (int c = 0; c < cols; ++c) nxt[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double* wr = W + size_t(r) * cols;
      double dr = cur[r];
      for (int c = 0; c < cols; ++c) nxt[c] += wr[c] * dr;
    }
    // through the previous layer's activation
    if (l > 0) {
      const double* pre_prev = s.pre.data() + layer_off;
      for (int c = 0; c < cols; ++c) nxt[c] *= silu_grad(pre_prev[c]);
    }
    std::swap(cur, nxt);
  }
  std::memcpy(grad_x.data(), cur, size_t(in_dim_) * sizeof(double));
  return q;
}

CriticNetwork::CriticNetwork(int state_dim, int action_dim, std::vector<int> hidden)
    : k_(state_dim), d_(action_dim), mlp_(state_dim + action_dim, std::move(hidden), 1) {}

double CriticNetwork::q(std::span<const double> s, std::span<const double> a, MlpScratch& scratch) const {
  if (s.size() != size_t(k_) || a.size() != size_t(d_)) {
    throw std::invalid_argument("CriticNetwork: dimension mismatch");
  }
  std::vector<double> x(size_t(k_ + d_));
  std::memcpy(x.data(), s.data(), s.size() * sizeof(double));
  std::memcpy(x.data() + k_, a.data(), a.size() * sizeof(double));
  double out;
  mlp_.eval(x, {&out, 1}, scratch);
  return out;
}

double CriticNetwork::action_grad(std::span<const double> s, std::span<const double> a,
                                  std::span<double> grad_a, MlpScratch& scratch) const {
  if (s.size() != size_t(k_) || a.size() != size_t(d_) || grad_a.size() != size_t(d_)) {
    throw std::invalid_argument("CriticNetwork: dimension mismatch");
  }
  std::vector<double> x(size_t(k_ + d_));
  std::memcpy(x.data(), s.data(), s.size() * sizeof(double));
  std::memcpy(x.data() + k_, a.data(), a.size() * sizeof(double));
  std::vector<double> g(size_t(k_ + d_));
  double q = mlp_.eval_scalar_grad(x, g, scratch);
  std::memcpy(grad_a.data(), g.data() + k_, size_t(d_) * sizeof(double));
  return q;
}

NodeId CriticNetwork::build_q(Tape& t, const Mlp::Bound& b, NodeId s, NodeId a) const {
  if (t.rows(s) != uint32_t(k_) || t.rows(a) != uint32_t(d_)) {
    throw std::invalid_argument("CriticNetwork: dimension mismatch");
  }
  return mlp_.forward(t, b, t.concat(s, a));
}

NodeId CriticNetwork::action_gradient(Tape& t, const Mlp::Bound& b, NodeId s, NodeId a) const {
  NodeId q = build_q(t, b, s, a);
  NodeId g = t.backward1(q, a);
  t.count_input_grad_eval();
  if (g == kNoNode) {
    std::vector<double> zeros(size_t(d_), 0.0);
    g = t.constant(zeros, uint32_t(d_));
  }
  return g;
}

NodeId CriticNetwork::hvp_action(Tape& t, const Mlp::Bound& b, NodeId s, std::span<const double> a,
                                 std::span<const double> v, double eps_fd) const {
  if (a.size() != size_t(d_) || v.size() != size_t(d_)) {
    throw std::invalid_argument("CriticNetwork: dimension mismatch");
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    std::vector<double> zeros(size_t(d_), 0.0);
    return t.constant(zeros, uint32_t(d_));
  }
  std::vector<double> ap(a.begin(), a.end()), am(a.begin(), a.end());
  for (size_t i = 0; i < v.size(); ++i) {
    ap[i] += eps_fd * v[i];
    am[i] -= eps_fd * v[i];
  }
  NodeId a_plus = t.input(uint32_t(d_));
  t.set_input(a_plus, ap);
  NodeId a_minus = t.input(uint32_t(d_));
  t.set_input(a_minus, am);
  NodeId gp = action_gradient(t, b, s, a_plus);
  NodeId gm = action_gradient(t, b, s, a_minus);
  return t.scale(t.constant(1.0 / (2.0 * eps_fd)), t.sub(gp, gm));
}

ActorNetwork::ActorNetwork(int state_dim, int action_dim, std::vector<int> hidden, double action_bound)
    : k_(state_dim), d_(action_dim), bound_(action_bound),
      mlp_(state_dim, std::move(hidden), action_dim) {
  if (action_bound <= 0.0) throw std::invalid_argument("ActorNetwork: bound must be positive");
}

void ActorNetwork::act(std::span<const double> s, std::span<double> a, MlpScratch& scratch) const {
  if (s.size() != size_t(k_) || a.size() != size_t(d_)) {
    throw std::invalid_argument("ActorNetwork: dimension mismatch");
  }
  mlp_.eval(s, a, scratch);
  // tanh written via the logistic so the fast path matches the tape kernels
  for (double& x : a) x = bound_ * (2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0);
}

NodeId ActorNetwork::build_action(Tape& t, const Mlp::Bound& b, NodeId s) const {
  NodeId z = mlp_.forward(t, b, s);
  NodeId two_z = t.scale(t.constant(2.0), z);
  NodeId sig = t.sigmoid(two_z);
  std::vector<double> one(size_t(d_), 1.0);
  NodeId ones = t.constant(one, uint32_t(d_));
  NodeId tanh_z = t.sub(t.scale(t.constant(2.0), sig), ones);
  return t.scale(t.constant(bound_), tanh_z);
}

ParamVector param_gradient(Tape& t, NodeId loss, const Mlp::Bound& bound, const Mlp& net) {
  std::vector<NodeId> adj = t.backward(loss, bound.ids);
  ParamVector g(std::vector<ParamShape>(net.params().layout()));
  for (size_t i = 0; i < adj.size(); ++i) {
    if (adj[i] == kNoNode) continue;
    std::span<const double> vals = t.values(adj[i]);
    std::span<double> dst = g.entry(i);
    std::memcpy(dst.data(), vals.data(), vals.size() * sizeof(double));
  }
  return g;
}

}  // namespace pave
