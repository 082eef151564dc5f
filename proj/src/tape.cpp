#include "pave/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>

namespace pave {

void Tape::reset() {
  nodes_.clear();
  arena_size_ = 0;
  input_grad_evals_ = 0;
}

size_t Tape::arena_alloc(size_t count) {
  size_t off = arena_size_;
  if (arena_size_ + count > arena_.size()) {
    arena_.resize(std::max(arena_.size() * 2, arena_size_ + count));
  }
  arena_size_ += count;
  return off;
}

NodeId Tape::push(Node n) {
  size_t count = size_t(n.rows) * n.cols;
  n.val = arena_alloc(count);
  nodes_.push_back(n);
  NodeId id = static_cast<NodeId>(nodes_.size() - 1);
  eval_node(static_cast<size_t>(id));
  return id;
}

double* Tape::data(NodeId id) { return arena_.data() + nodes_[size_t(id)].val; }
const double* Tape::cdata(NodeId id) const { return arena_.data() + nodes_[size_t(id)].val; }

double Tape::value(NodeId id) const {
  const Node& n = nodes_[size_t(id)];
  if (n.rows != 1 || n.cols != 1) throw std::invalid_argument("tape: value() on non-scalar node");
  return *cdata(id);
}

std::span<const double> Tape::values(NodeId id) const {
  return {cdata(id), numel(id)};
}

NodeId Tape::leaf(const double* data, uint32_t rows, uint32_t cols) {
  Node n{Op::kLeaf, rows, cols};
  n.ext = data;
  return push(n);
}

NodeId Tape::input(uint32_t rows, uint32_t cols) {
  NodeId id = push(Node{Op::kLeaf, rows, cols});
  std::memset(data(id), 0, numel(id) * sizeof(double));
  return id;
}

NodeId Tape::constant(double v) {
  NodeId id = push(Node{Op::kConst, 1, 1});
  *data(id) = v;
  return id;
}

NodeId Tape::constant(std::span<const double> v, uint32_t rows, uint32_t cols) {
  if (v.size() != size_t(rows) * cols) throw std::invalid_argument("tape: constant size mismatch");
  NodeId id = push(Node{Op::kConst, rows, cols});
  std::memcpy(data(id), v.data(), v.size() * sizeof(double));
  return id;
}

void Tape::set_input(NodeId id, std::span<const double> v) {
  Node& n = nodes_[size_t(id)];
  if (n.op != Op::kLeaf || n.ext != nullptr) throw std::invalid_argument("tape: set_input on non-owned leaf");
  if (v.size() != numel(id)) throw std::invalid_argument("tape: set_input size mismatch");
  std::memcpy(data(id), v.data(), v.size() * sizeof(double));
}

static void check_same_shape(const Node& a, const Node& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument(std::string("tape: dimension mismatch in ") + what);
  }
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_shape(node(a), node(b), "add");
  return push(Node{Op::kAdd, node(a).rows, node(a).cols, a, b});
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_shape(node(a), node(b), "sub");
  return push(Node{Op::kSub, node(a).rows, node(a).cols, a, b});
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check_same_shape(node(a), node(b), "mul");
  return push(Node{Op::kMul, node(a).rows, node(a).cols, a, b});
}

NodeId Tape::neg(NodeId a) { return push(Node{Op::kNeg, node(a).rows, node(a).cols, a}); }
NodeId Tape::sigmoid(NodeId a) { return push(Node{Op::kSigmoid, node(a).rows, node(a).cols, a}); }
NodeId Tape::relu(NodeId a) { return push(Node{Op::kRelu, node(a).rows, node(a).cols, a}); }
NodeId Tape::step(NodeId a) { return push(Node{Op::kStep, node(a).rows, node(a).cols, a}); }

NodeId Tape::scale(NodeId s, NodeId v) {
  if (numel(s) != 1) throw std::invalid_argument("tape: scale factor must be scalar");
  return push(Node{Op::kScale, node(v).rows, node(v).cols, s, v});
}

NodeId Tape::dot(NodeId a, NodeId b) {
  if (numel(a) != numel(b)) throw std::invalid_argument("tape: dimension mismatch in dot");
  return push(Node{Op::kDot, 1, 1, a, b});
}

NodeId Tape::matvec(NodeId m, NodeId x) {
  const Node& mn = node(m);
  if (node(x).cols != 1 || mn.cols != node(x).rows) {
    throw std::invalid_argument("tape: dimension mismatch in matvec");
  }
  return push(Node{Op::kMatVec, mn.rows, 1, m, x});
}

NodeId Tape::mat_t_vec(NodeId m, NodeId x) {
  const Node& mn = node(m);
  if (node(x).cols != 1 || mn.rows != node(x).rows) {
    throw std::invalid_argument("tape: dimension mismatch in mat_t_vec");
  }
  return push(Node{Op::kMatTVec, mn.cols, 1, m, x});
}

NodeId Tape::outer(NodeId u, NodeId v) {
  if (node(u).cols != 1 || node(v).cols != 1) throw std::invalid_argument("tape: outer expects vectors");
  return push(Node{Op::kOuter, node(u).rows, node(v).rows, u, v});
}

NodeId Tape::concat(NodeId a, NodeId b) {
  if (node(a).cols != 1 || node(b).cols != 1) throw std::invalid_argument("tape: concat expects vectors");
  return push(Node{Op::kConcat, node(a).rows + node(b).rows, 1, a, b});
}

NodeId Tape::slice(NodeId x, uint32_t off, uint32_t len) {
  if (node(x).cols != 1 || off + len > node(x).rows) throw std::invalid_argument("tape: slice out of range");
  Node n{Op::kSlice, len, 1, x};
  n.off = off;
  return push(n);
}

NodeId Tape::pad(NodeId x, uint32_t off, uint32_t total) {
  if (node(x).cols != 1 || off + node(x).rows > total) throw std::invalid_argument("tape: pad out of range");
  Node n{Op::kPad, total, 1, x};
  n.off = off;
  return push(n);
}

void Tape::eval_node(size_t i) {
  Node& n = nodes_[i];
  double* out = arena_.data() + n.val;
  size_t count = size_t(n.rows) * n.cols;
  const double* pa = n.a >= 0 ? arena_.data() + nodes_[size_t(n.a)].val : nullptr;
  const double* pb = n.b >= 0 ? arena_.data() + nodes_[size_t(n.b)].val : nullptr;

  switch (n.op) {
    case Op::kLeaf:
      if (n.ext != nullptr) std::memcpy(out, n.ext, count * sizeof(double));
      break;
    case Op::kConst:
      break;
    case Op::kAdd:
      for (size_t j = 0; j < count; ++j) out[j] = pa[j] + pb[j];
      break;
    case Op::kSub:
      for (size_t j = 0; j < count; ++j) out[j] = pa[j] - pb[j];
      break;
    case Op::kMul:
      for (size_t j = 0; j < count; ++j) out[j] = pa[j] * pb[j];
      break;
    case Op::kNeg:
      for (size_t j = 0; j < count; ++j) out[j] = -pa[j];
      break;
    case Op::kSigmoid:
      for (size_t j = 0; j < count; ++j) out[j] = 1.0 / (1.0 + std::exp(-pa[j]));
      break;
    case Op::kRelu:
      for (size_t j = 0; j < count; ++j) out[j] = pa[j] > 0.0 ? pa[j] : 0.0;
      break;
    case Op::kStep:
      for (size_t j = 0; j < count; ++j) out[j] = pa[j] > 0.0 ? 1.0 : 0.0;
      break;
    case Op::kScale: {
      double s = pa[0];
      for (size_t j = 0; j < count; ++j) out[j] = s * pb[j];
      break;
    }
    case Op::kDot: {
      double acc = 0.0;
      size_t m = numel(n.a);
      for (size_t j = 0; j < m; ++j) acc += pa[j] * pb[j];
      out[0] = acc;
      break;
    }
    case Op::kMatVec: {
      const Node& ma = nodes_[size_t(n.a)];
      for (uint32_t r = 0; r < ma.rows; ++r) {
        const double* row = pa + size_t(r) * ma.cols;
        double acc = 0.0;
        for (uint32_t c = 0; c < ma.cols; ++c) acc += row[c] * pb[c];
        out[r] = acc;
      }
      break;
    }
    case Op::kMatTVec: {
      const Node& ma = nodes_[size_t(n.a)];
      for (uint32_t c = 0; c < ma.cols; ++c) out[c] = 0.0;
      for (uint32_t r = 0; r < ma.rows; ++r) {
        const double* row = pa + size_t(r) * ma.cols;
        double xr = pb[r];
        for (uint32_t c = 0; c < ma.cols; ++c) out[c] += row[c] * xr;
      }
      break;
    }
    case Op::kOuter: {
      for (uint32_t r = 0; r < n.rows; ++r) {
        double ur = pa[r];
        double* row = out + size_t(r) * n.cols;
        for (uint32_t c = 0; c < n.cols; ++c) row[c] = ur * pb[c];
      }
      break;
    }
    case Op::kConcat: {
      size_t na = numel(n.a);
      std::memcpy(out, pa, na * sizeof(double));
      std::memcpy(out + na, pb, numel(n.b) * sizeof(double));
      break;
    }
    case Op::kSlice:
      std::memcpy(out, pa + n.off, count * sizeof(double));
      break;
    case Op::kPad: {
      std::memset(out, 0, count * sizeof(double));
      std::memcpy(out + n.off, pa, numel(n.a) * sizeof(double));
      break;
    }
  }
}

void Tape::forward_all() {
  for (size_t i = 0; i < nodes_.size(); ++i) eval_node(i);
}

NodeId Tape::backward1(NodeId output, NodeId wrt) {
  NodeId ids[1] = {wrt};
  return backward(output, ids)[0];
}

std::vector<NodeId> Tape::backward(NodeId output, std::span<const NodeId> wrt) {
  if (numel(output) != 1) throw std::invalid_argument("tape: backward expects a scalar output");

  // adjoints are only materialized along paths that can reach a wrt node;
  // every consumer of such a node is itself on such a path, so nothing kept
  // loses a contribution
  std::vector<uint8_t>& reach = reach_scratch_;
  reach.assign(static_cast<size_t>(output) + 1, 0);
  for (NodeId w : wrt) {
    if (w >= 0 && w <= output) reach[size_t(w)] = 1;
  }
  for (NodeId i = 0; i <= output; ++i) {
    if (reach[size_t(i)]) continue;
    const Node& n = nodes_[size_t(i)];
    if ((n.a >= 0 && reach[size_t(n.a)]) || (n.b >= 0 && reach[size_t(n.b)])) reach[size_t(i)] = 1;
  }

  std::vector<NodeId>& adj = adj_scratch_;
  adj.assign(static_cast<size_t>(output) + 1, kNoNode);
  if (!reach[size_t(output)]) {
    return std::vector<NodeId>(wrt.size(), kNoNode);
  }
  adj[size_t(output)] = constant(1.0);

  auto accum = [&](NodeId target, NodeId contribution) {
    if (target > output) return;  // node created during this sweep
    if (!reach[size_t(target)]) return;
    NodeId& slot = adj[size_t(target)];
    slot = (slot == kNoNode) ? contribution : add(slot, contribution);
  };

  for (NodeId i = output; i >= 0; --i) {
    NodeId g = adj[size_t(i)];
    if (g == kNoNode) continue;
    const Node n = nodes_[size_t(i)];  // copy: nodes_ may reallocate below
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kAdd:
        accum(n.a, g);
        accum(n.b, g);
        break;
      case Op::kSub:
        accum(n.a, g);
        if (reach[size_t(n.b)]) accum(n.b, neg(g));
        break;
      case Op::kMul:
        if (reach[size_t(n.a)]) accum(n.a, mul(g, n.b));
        if (reach[size_t(n.b)]) accum(n.b, mul(g, n.a));
        break;
      case Op::kNeg:
        accum(n.a, neg(g));
        break;
      case Op::kSigmoid: {
        if (!reach[size_t(n.a)]) break;
        // d/dx sigmoid = s (1 - s), with s the already-computed output
        std::vector<double> ones(numel(i), 1.0);
        NodeId one = constant(ones, n.rows, n.cols);
        accum(n.a, mul(g, mul(NodeId(i), sub(one, NodeId(i)))));
        break;
      }
      case Op::kRelu:
        if (reach[size_t(n.a)]) accum(n.a, mul(g, step(n.a)));
        break;
      case Op::kStep:
        break;  // derivative zero almost everywhere
      case Op::kScale:
        if (reach[size_t(n.a)]) accum(n.a, dot(g, n.b));
        if (reach[size_t(n.b)]) accum(n.b, scale(n.a, g));
        break;
      case Op::kDot:
        if (reach[size_t(n.a)]) accum(n.a, scale(g, n.b));
        if (reach[size_t(n.b)]) accum(n.b, scale(g, n.a));
        break;
      case Op::kMatVec:
        if (reach[size_t(n.a)]) accum(n.a, outer(g, n.b));
        if (reach[size_t(n.b)]) accum(n.b, mat_t_vec(n.a, g));
        break;
      case Op::kMatTVec:
        if (reach[size_t(n.a)]) accum(n.a, outer(n.b, g));
        if (reach[size_t(n.b)]) accum(n.b, matvec(n.a, g));
        break;
      case Op::kOuter: {
        // treat the adjoint matrix as an operator on the other factor
        if (reach[size_t(n.a)]) accum(n.a, matvec(g, n.b));
        if (reach[size_t(n.b)]) accum(n.b, mat_t_vec(g, n.a));
        break;
      }
      case Op::kConcat:
        if (reach[size_t(n.a)]) accum(n.a, slice(g, 0, nodes_[size_t(n.a)].rows));
        if (reach[size_t(n.b)]) accum(n.b, slice(g, nodes_[size_t(n.a)].rows, nodes_[size_t(n.b)].rows));
        break;
      case Op::kSlice:
        accum(n.a, pad(g, n.off, nodes_[size_t(n.a)].rows));
        break;
      case Op::kPad:
        accum(n.a, slice(g, n.off, nodes_[size_t(n.a)].rows));
        break;
    }
  }

  std::vector<NodeId> out;
  out.reserve(wrt.size());
  for (NodeId w : wrt) {
    out.push_back(w <= output ? adj[size_t(w)] : kNoNode);
  }
  return out;
}

}  // namespace pave
