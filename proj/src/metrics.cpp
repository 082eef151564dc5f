#include "pave/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pave {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> fft_real(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("fft_real: empty input");
  size_t n = next_pow2(x.size());
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double two_pi = 6.283185307179586476925286766559;
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -two_pi / double(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  return a;
}

SmoothnessReport smoothness_score(const ActionTrace& trace) {
  if (trace.dt <= 0.0) throw std::invalid_argument("smoothness_score: dt must be positive");
  if (trace.series.empty()) throw std::invalid_argument("smoothness_score: no action dimensions");
  size_t n = trace.series.front().size();
  if (n < 2) throw std::invalid_argument("smoothness_score: need at least two samples");

  SmoothnessReport rep;
  rep.n = n;
  rep.sampling_hz = 1.0 / trace.dt;

  for (const std::vector<double>& dim : trace.series) {
    if (dim.size() != n) throw std::invalid_argument("smoothness_score: ragged trace");
    // shifted-data mean: exact for constant traces, less cancellation otherwise
    double anchor = dim.front();
    double shift = 0.0;
    for (double v : dim) {
      if (!std::isfinite(v)) throw std::invalid_argument("smoothness_score: non-finite sample");
      shift += v - anchor;
    }
    double mean = anchor + shift / double(n);
    std::vector<double> centered(dim.size());
    for (size_t i = 0; i < n; ++i) centered[i] = dim[i] - mean;

    std::vector<std::complex<double>> spec = fft_real(centered);
    size_t n_pad = spec.size();
    double fs = rep.sampling_hz;
    double score = 0.0;
    for (size_t i = 1; i <= n_pad / 2; ++i) {
      double amplitude = 2.0 / double(n) * std::abs(spec[i]);
      double freq = double(i) * fs / double(n_pad);
      score += amplitude * freq;
    }
    score *= 2.0 / (double(n_pad) * fs);
    rep.per_dim.push_back(score);
  }

  double acc = 0.0;
  for (double s : rep.per_dim) acc += s;
  rep.aggregate = acc / double(rep.per_dim.size());
  return rep;
}

double cumulative_return(std::span<const double> rewards) {
  double acc = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("cumulative_return: non-finite reward");
    acc += r;
  }
  return acc;
}

}  // namespace pave
