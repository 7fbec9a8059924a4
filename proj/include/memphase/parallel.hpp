#pragma once

// Chunked map-reduce with a fixed chunk size. Reductions are carried out
// pairwise inside each chunk and then pairwise across chunk partials in
// chunk-index order, so results are bitwise independent of the worker count.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace memphase::parallel {

inline constexpr std::size_t kChunkSize = 4096;

/// Number of worker threads used by for_chunks. 0 selects
/// std::thread::hardware_concurrency().
void set_threads(unsigned n);
unsigned threads();

/// Pairwise (tree) sum; deterministic for a fixed input order.
double pairwise_sum(std::span<const double> values);

/// Calls body(chunk_index, begin, end) for every chunk of [0, n).
/// Chunks may run concurrently; body must only write chunk-local state.
void for_chunks(std::size_t n,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n) {
  return (n + kChunkSize - 1) / kChunkSize;
}

/// Deterministic sum of term(i) over [0, n) for K simultaneous quantities.
template <std::size_t K, class Term>
std::array<double, K> sum_n(std::size_t n, Term&& term) {
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks * K, 0.0);
  for_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::array<std::vector<double>, K> buffer;
    for (auto& b : buffer) b.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::array<double, K> t = term(i);
      for (std::size_t k = 0; k < K; ++k) buffer[k][i - begin] = t[k];
    }
    for (std::size_t k = 0; k < K; ++k) partial[k * chunks + c] = pairwise_sum(buffer[k]);
  });
  std::array<double, K> out{};
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = pairwise_sum(std::span<const double>(partial).subspan(k * chunks, chunks));
  }
  return out;
}

template <class Term>
double sum(std::size_t n, Term&& term) {
  return sum_n<1>(n, [&](std::size_t i) { return std::array<double, 1>{term(i)}; })[0];
}

/// Runtime-width variant of sum_n: term(i, out) writes k values into out.
std::vector<double> sum_many(std::size_t n, std::size_t k,
                             const std::function<void(std::size_t, std::span<double>)>& term);

/// Deterministic maximum of term(i); max is order independent anyway.
double max_of(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace memphase::parallel
