#include "memphase/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace memphase::parallel {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_threads(unsigned n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(n);
}

unsigned threads() { return g_threads.load(); }

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void for_chunks(std::size_t n,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(n);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads(), std::max<std::size_t>(chunks, 1)));
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kChunkSize;
    body(c, begin, std::min(n, begin + kChunkSize));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        run_chunk(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> sum_many(std::size_t n, std::size_t k,
                             const std::function<void(std::size_t, std::span<double>)>& term) {
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks * k, 0.0);
  for_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
    const std::size_t len = end - begin;
    std::vector<double> buffer(len * k);
    std::vector<double> row(k);
    for (std::size_t i = begin; i < end; ++i) {
      term(i, row);
      for (std::size_t j = 0; j < k; ++j) buffer[j * len + (i - begin)] = row[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      partial[j * chunks + c] = pairwise_sum(std::span<const double>(buffer).subspan(j * len, len));
    }
  });
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = pairwise_sum(std::span<const double>(partial).subspan(j * chunks, chunks));
  }
  return out;
}

double max_of(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks, -INFINITY);
  for_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
    double m = -INFINITY;
    for (std::size_t i = begin; i < end; ++i) m = std::max(m, term(i));
    partial[c] = m;
  });
  double m = -INFINITY;
  for (double p : partial) m = std::max(m, p);
  return m;
}

}  // namespace memphase::parallel
