#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pave/rng.hpp"

namespace pave {

struct Transition {
  std::vector<double> s, a;
  double r = 0.0;
  std::vector<double> s_next;
  bool truncated = false;
};

// Fixed-capacity ring buffer with contiguous per-field storage.
class ReplayBuffer {
 public:
  ReplayBuffer(int state_dim, int action_dim, size_t capacity);

  int state_dim() const { return k_; }
  int action_dim() const { return d_; }
  size_t capacity() const { return capacity_; }
  size_t size() const { return size_; }

  void push(std::span<const double> s, std::span<const double> a, double r,
            std::span<const double> s_next, bool truncated);

  std::span<const double> state(size_t i) const { return {s_.data() + i * size_t(k_), size_t(k_)}; }
  std::span<const double> action(size_t i) const { return {a_.data() + i * size_t(d_), size_t(d_)}; }
  double reward(size_t i) const { return r_[i]; }
  std::span<const double> next_state(size_t i) const {
    return {sn_.data() + i * size_t(k_), size_t(k_)};
  }
  bool truncated(size_t i) const { return trunc_[i] != 0; }

  // Uniform with replacement over [0, size).
  std::vector<size_t> sample_indices(size_t batch, Rng& rng) const;

 private:
  int k_, d_;
  size_t capacity_, size_ = 0, head_ = 0;
  std::vector<double> s_, a_, r_, sn_;
  std::vector<uint8_t> trunc_;
};

// One sampled batch gathered into contiguous rows.
struct BatchView {
  int k = 0, d = 0;
  size_t count = 0;
  std::vector<double> s, a, r, s_next;
  std::vector<uint8_t> truncated;

  std::span<const double> row_s(size_t e) const { return {s.data() + e * size_t(k), size_t(k)}; }
  std::span<const double> row_a(size_t e) const { return {a.data() + e * size_t(d), size_t(d)}; }
  std::span<const double> row_sn(size_t e) const {
    return {s_next.data() + e * size_t(k), size_t(k)};
  }
};

BatchView gather_batch(const ReplayBuffer& buffer, std::span<const size_t> indices);

}  // namespace pave
