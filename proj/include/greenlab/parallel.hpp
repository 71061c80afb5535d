#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace greenlab {

/// Worker threads used by parallel_for / deterministic_sum. 0 = hardware
/// concurrency. Results never depend on this value: work is split into
/// fixed-size chunks and reduced in a fixed pairwise order.
void set_thread_count(int n);
int thread_count();

/// Runs fn(begin, end) over [0, n) split into fixed-size chunks distributed
/// over the worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Pairwise tree sum in a fixed order; bit-reproducible and
/// thread-count-independent.
double pairwise_sum(std::span<const double> xs);

/// Parallel map-reduce: sums term(i) over i in [0, n) with fixed chunking and
/// pairwise reduction of chunk sums.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Max of term(i) over [0, n); exact regardless of evaluation order.
/// Returns 0 for n == 0.
double parallel_max(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace greenlab
