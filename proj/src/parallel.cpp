#include "greenlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <thread>

namespace greenlab {

namespace {
std::atomic<int> g_threads{0};
constexpr std::size_t kChunk = 4096;

int effective_threads() {
  int t = g_threads.load();
  if (t > 0) return t;
  const char* env = std::getenv("GREENLAB_THREADS");
  if (env) {
    int e = std::atoi(env);
    if (e > 0) return e;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}
}  // namespace

void set_thread_count(int n) { g_threads.store(n); }
int thread_count() { return effective_threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t nchunks = (n + kChunk - 1) / kChunk;
  int nthreads = effective_threads();
  if (nthreads <= 1 || nchunks <= 1) {
    fn(0, n);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      std::size_t b = c * kChunk;
      fn(b, std::min(n, b + kChunk));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

double pairwise_sum(std::span<const double> xs) {
  std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    // [b, e) is a chunk-aligned union of fixed chunks (a single chunk when
    // threaded, the whole range otherwise); reduce each chunk separately so
    // the association never depends on the thread count
    std::vector<double> vals;
    for (std::size_t cb = b; cb < e; cb += kChunk) {
      std::size_t ce = std::min(e, cb + kChunk);
      vals.clear();
      vals.reserve(ce - cb);
      for (std::size_t i = cb; i < ce; ++i) vals.push_back(term(i));
      partial[cb / kChunk] = pairwise_sum(vals);
    }
  });
  return pairwise_sum(partial);
}

double parallel_max(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, -std::numeric_limits<double>::infinity());
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = b; i < e; ++i) m = std::max(m, term(i));
    partial[b / kChunk] = m;
  });
  double m = partial[0];
  for (double v : partial) m = std::max(m, v);
  return m;
}

}  // namespace greenlab
