#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pave {

// Radix-2 decimation-in-time transform. The input is zero-padded up to the
// next power of two; the returned spectrum has the padded length.
std::vector<std::complex<double>> fft_real(std::span<const double> x);

size_t next_pow2(size_t n);

struct ActionTrace {
  double dt = 0.05;                          // seconds per control step
  std::vector<std::vector<double>> series;   // one sequence per action dim
};

struct SmoothnessReport {
  std::vector<double> per_dim;
  double aggregate = 0.0;  // mean over action dimensions
  size_t n = 0;
  double sampling_hz = 0.0;
};

// Frequency-weighted single-sided amplitude sum: the trace is mean-centered,
// zero-padded to a power of two and transformed; with A_i = (2/n)|X_i| at
// f_i = i f_s / n_pad, the score is (2 / (n_pad f_s)) * sum_i A_i f_i over
// i = 1..n_pad/2. Constant traces score exactly zero and scaling the trace
// scales the score.
SmoothnessReport smoothness_score(const ActionTrace& trace);

double cumulative_return(std::span<const double> rewards);

}  // namespace pave
