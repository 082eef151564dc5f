#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pave {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

enum class Op : uint8_t {
  kLeaf,     // externally bound or tape-owned input, differentiable
  kConst,    // fixed values, never differentiated
  kAdd,      // elementwise a + b
  kSub,      // elementwise a - b
  kMul,      // elementwise a * b
  kNeg,      // elementwise -a
  kSigmoid,  // elementwise logistic
  kRelu,     // elementwise max(0, x)
  kStep,     // elementwise 1[x > 0]; derivative treated as zero
  kScale,    // scalar a times vector/matrix b
  kDot,      // scalar product of two equal-length vectors
  kMatVec,   // a(r x c) * b(c) -> r
  kMatTVec,  // a(r x c)^T * b(r) -> c
  kOuter,    // a(r) b(c)^T -> r x c
  kConcat,   // [a; b] column vectors
  kSlice,    // contiguous sub-vector
  kPad,      // place a vector into a longer zero vector
};

struct Node {
  Op op;
  uint32_t rows = 0, cols = 0;
  NodeId a = kNoNode, b = kNoNode;
  uint32_t off = 0;        // slice/pad offset
  size_t val = 0;          // offset into the value arena
  const double* ext = nullptr;  // external storage for bound leaves
};

// Append-only computation graph over scalars, vectors and small dense
// matrices. Values are evaluated eagerly at construction and cached, so the
// node list doubles as a record of the forward pass. backward() emits the
// adjoint computation as new nodes on the same tape, which is what makes
// gradients of gradients possible: a second backward() differentiates
// straight through the first one.
class Tape {
 public:
  Tape() { reset(); }

  void reset();
  size_t size() const { return nodes_.size(); }

  // Leaves and constants. External leaves read through the given pointer,
  // which must stay valid for the lifetime of the tape.
  NodeId leaf(const double* data, uint32_t rows, uint32_t cols = 1);
  NodeId input(uint32_t rows, uint32_t cols = 1);  // owned, zero-initialized
  NodeId constant(double v);
  NodeId constant(std::span<const double> v, uint32_t rows, uint32_t cols = 1);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId relu(NodeId a);
  NodeId step(NodeId a);
  NodeId scale(NodeId s, NodeId v);
  NodeId dot(NodeId a, NodeId b);
  NodeId matvec(NodeId m, NodeId x);
  NodeId mat_t_vec(NodeId m, NodeId x);
  NodeId outer(NodeId u, NodeId v);
  NodeId concat(NodeId a, NodeId b);
  NodeId slice(NodeId x, uint32_t off, uint32_t len);
  NodeId pad(NodeId x, uint32_t off, uint32_t total);

  // x * sigmoid(x), the C2 activation used throughout.
  NodeId silu(NodeId x) { return mul(x, sigmoid(x)); }

  void set_input(NodeId id, std::span<const double> v);

  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  uint32_t rows(NodeId id) const { return node(id).rows; }
  uint32_t cols(NodeId id) const { return node(id).cols; }
  size_t numel(NodeId id) const { return size_t(node(id).rows) * node(id).cols; }

  double value(NodeId id) const;
  std::span<const double> values(NodeId id) const;

  // Recompute every cached value in order, re-reading bound leaves. Identical
  // inputs reproduce identical bits.
  void forward_all();

  // Reverse sweep from a scalar node. Adjoints are emitted as new tape nodes;
  // returns one adjoint id per requested node (kNoNode where no path exists).
  std::vector<NodeId> backward(NodeId output, std::span<const NodeId> wrt);
  NodeId backward1(NodeId output, NodeId wrt);

  // Instrumentation: number of input-gradient sweeps recorded by network
  // helpers (see CriticNetwork::action_gradient).
  void count_input_grad_eval() { ++input_grad_evals_; }
  long input_grad_evals() const { return input_grad_evals_; }

 private:
  NodeId push(Node n);
  void eval_node(size_t i);
  double* data(NodeId id);
  const double* cdata(NodeId id) const;
  size_t arena_alloc(size_t count);

  std::vector<Node> nodes_;
  std::vector<double> arena_;     // grown without value-initialization
  size_t arena_size_ = 0;
  long input_grad_evals_ = 0;
  // scratch reused across backward sweeps
  std::vector<NodeId> adj_scratch_;
  std::vector<uint8_t> reach_scratch_;
};

}  // namespace pave
