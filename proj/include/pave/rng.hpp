#pragma once

#include <cmath>
#include <cstdint>

namespace pave {

// Named random streams derived from one master seed. Keeping the streams
// separate means e.g. regularizer noise never shifts environment noise
// when a regularizer is switched on or off.
enum class Stream : uint64_t {
  kInit = 1,         // network weight initialization
  kEnv = 2,          // environment resets
  kExploration = 3,  // action exploration noise
  kTargetNoise = 4,  // target policy smoothing
  kReplay = 5,       // batch index sampling
  kPerturbation = 6, // state perturbations for the mixed-partial term
  kRademacher = 7,   // sign vectors for the curvature term
  kEval = 8,         // evaluation episode resets
  kObsNoise = 9,     // observation noise at evaluation time
};

// Splitmix-style counter generator. Small state, full 64-bit output mixing,
// and cheap deterministic stream splitting. All distributions below are
// implemented explicitly so results are pinned to the bit across builds.
class Rng {
 public:
  Rng() : state_(0x853c49e6748fea9bULL) {}
  explicit Rng(uint64_t seed) : state_(mix(seed)) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Derive an independent stream from (master, stream, index).
  static Rng stream(uint64_t master, Stream id, uint64_t index = 0) {
    uint64_t s = mix(master);
    s = mix(s ^ (0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(id) + 1)));
    s = mix(s ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    Rng r;
    r.state_ = s;
    return r;
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform01_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, two uniforms per draw (no cached spare, keeps streams simple).
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01_open();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + stddev * z;
  }

  // Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
  uint64_t uniform_int(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  double rademacher() { return (next_u64() & 1) ? 1.0 : -1.0; }

 private:
  uint64_t state_;
};

}  // namespace pave
