#include "pave/replay.hpp"

#include <cstring>
#include <stdexcept>

namespace pave {

ReplayBuffer::ReplayBuffer(int state_dim, int action_dim, size_t capacity)
    : k_(state_dim), d_(action_dim), capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  s_.resize(capacity * size_t(k_));
  a_.resize(capacity * size_t(d_));
  r_.resize(capacity);
  sn_.resize(capacity * size_t(k_));
  trunc_.resize(capacity);
}

void ReplayBuffer::push(std::span<const double> s, std::span<const double> a, double r,
                        std::span<const double> s_next, bool truncated) {
  if (s.size() != size_t(k_) || a.size() != size_t(d_) || s_next.size() != size_t(k_)) {
    throw std::invalid_argument("ReplayBuffer: dimension mismatch");
  }
  if (!std::isfinite(r)) throw std::invalid_argument("ReplayBuffer: non-finite reward");
  std::memcpy(s_.data() + head_ * size_t(k_), s.data(), s.size() * sizeof(double));
  std::memcpy(a_.data() + head_ * size_t(d_), a.data(), a.size() * sizeof(double));
  r_[head_] = r;
  std::memcpy(sn_.data() + head_ * size_t(k_), s_next.data(), s_next.size() * sizeof(double));
  trunc_[head_] = truncated ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t batch, Rng& rng) const {
  if (size_ == 0) throw std::invalid_argument("ReplayBuffer: empty");
  std::vector<size_t> idx(batch);
  for (size_t& i : idx) i = rng.uniform_int(size_);
  return idx;
}

BatchView gather_batch(const ReplayBuffer& buffer, std::span<const size_t> indices) {
  BatchView b;
  b.k = buffer.state_dim();
  b.d = buffer.action_dim();
  b.count = indices.size();
  b.s.resize(b.count * size_t(b.k));
  b.a.resize(b.count * size_t(b.d));
  b.r.resize(b.count);
  b.s_next.resize(b.count * size_t(b.k));
  b.truncated.resize(b.count);
  for (size_t e = 0; e < b.count; ++e) {
    size_t i = indices[e];
    std::memcpy(b.s.data() + e * size_t(b.k), buffer.state(i).data(), size_t(b.k) * sizeof(double));
    std::memcpy(b.a.data() + e * size_t(b.d), buffer.action(i).data(), size_t(b.d) * sizeof(double));
    b.r[e] = buffer.reward(i);
    std::memcpy(b.s_next.data() + e * size_t(b.k), buffer.next_state(i).data(),
                size_t(b.k) * sizeof(double));
    b.truncated[e] = buffer.truncated(i) ? 1 : 0;
  }
  return b;
}

}  // namespace pave
