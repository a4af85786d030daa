#pragma once

// Shared plumbing: error taxonomy, deterministic seed-derived RNG streams,
// locale-free number formatting/parsing, and a minimal parallel-for.
//
// Reproducibility contract: every stochastic component in the library draws
// from an Rng seeded through derive_seed(master, stream, index), never from
// a shared generator. Results are therefore independent of thread count and
// evaluation order.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>
#include <vector>

namespace glassgam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV cells, JSON documents).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Column/feature mismatches between data, schema, and models.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Values outside an operation's domain (labels, probabilities, sizes).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent run/train configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Seed derivation and RNG

namespace streams {
// Stable stream labels; changing these changes every derived artifact.
inline constexpr std::uint64_t outer_bag = 0x0B01;
inline constexpr std::uint64_t row = 0x0B02;
inline constexpr std::uint64_t eval = 0x0B03;
inline constexpr std::uint64_t resample = 0x0B04;
inline constexpr std::uint64_t subset = 0x0B05;
inline constexpr std::uint64_t partition = 0x0B06;
}  // namespace streams

// splitmix64 finalizer; bijective on 64-bit ints.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Fans one master seed out to addressable substreams. Deterministic and
// independent of the order in which substreams are instantiated.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

// Deterministic generator with pinned algorithms. std::mt19937_64 has a
// standard-specified sequence; the distributions below are implemented here
// because the standard library's are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw ValueError("Rng::bounded: n must be positive");
    unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller without a cached spare so each call consumes exactly two draws.
  double normal(double mean = 0.0, double sd = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + sd * r * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

// Sorted m-of-n sample without replacement (selection sampling). Consumes one
// uniform per inspected element, so the draw sequence is reproducible.
inline std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::size_t n,
                                                             std::size_t m) {
  if (m > n) throw ValueError("sample_without_replacement: m exceeds n");
  std::vector<std::uint32_t> out;
  out.reserve(m);
  std::size_t needed = m;
  for (std::size_t i = 0; i < n && needed > 0; ++i) {
    if (rng.uniform() * static_cast<double>(n - i) < static_cast<double>(needed)) {
      out.push_back(static_cast<std::uint32_t>(i));
      --needed;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numeric helpers

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Type-7 quantile (linear interpolation between order statistics) of sorted
// values at probability p.
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ValueError("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// ---------------------------------------------------------------------------
// Locale-free formatting and parsing

// Shortest decimal form that round-trips the exact double.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Strict full-token parse; throws ParseError with the offending text.
inline double parse_double(std::string_view raw) {
  const std::string_view s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not a number: '" + std::string(raw) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view raw) {
  const std::string_view s = trim(raw);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not an integer: '" + std::string(raw) + "'");
  }
  return v;
}

inline std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      cells.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return cells;
}

// FNV-1a over a string; used for config digests in model metadata.
inline std::string hex_digest(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  char buf[17];
  static const char* hexd = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hexd[h & 0xF];
    h >>= 4;
  }
  return std::string(buf, 16);
}

// ---------------------------------------------------------------------------
// Parallel execution

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..n_tasks-1) on up to `threads` workers. Task results must not
// depend on scheduling; callers write to disjoint slots indexed by task.
inline void parallel_for(std::size_t n_tasks, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const int n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), n_tasks);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace glassgam
