// tilepile: sandpile dynamics on periodic tilings.
//
// Shared small utilities: exact rationals for geometric predicates, a
// counter-based reproducible RNG, and a minimal parallel-for helper.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>
#include <functional>
#include <cmath>

namespace tilepile {

inline constexpr const char* kVersion = "tilepile 0.1.0";

// ---------------------------------------------------------------------------
// Exact rational arithmetic on 64-bit numerator/denominator.
//
// Used only for geometric predicates (cell positions, hyperplane
// functionals, region membership), where the magnitudes stay tiny;
// every operation checks for overflow and throws rather than wrap.
// ---------------------------------------------------------------------------
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n) : num(n), den(1) {}
  Rat(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
      throw std::overflow_error("Rat: multiplication overflow");
    return r;
  }
  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
      throw std::overflow_error("Rat: addition overflow");
    return r;
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    return Rat(checked_add(checked_mul(a.num, b.den), checked_mul(b.num, a.den)),
               checked_mul(a.den, b.den));
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return Rat(checked_add(checked_mul(a.num, b.den), -checked_mul(b.num, a.den)),
               checked_mul(a.den, b.den));
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return Rat(checked_mul(a.num, b.num), checked_mul(a.den, b.den));
  }
  friend Rat operator-(const Rat& a) { Rat r(a); r.num = -r.num; return r; }
  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return checked_mul(a.num, b.den) < checked_mul(b.num, a.den);
  }
  friend bool operator<=(const Rat& a, const Rat& b) { return a < b || a == b; }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator>=(const Rat& a, const Rat& b) { return b <= a; }

  bool is_integer() const { return den == 1; }
  double to_double() const { return double(num) / double(den); }
  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Parse "p/q", "p", or a plain decimal (decimals are rationalized with a
// power-of-ten denominator, which is exact for the inputs we accept).
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den = Rat::checked_mul(den, 10);
    return Rat(std::stoll(digits), den);
  }
  return Rat(std::stoll(s));
}

// ---------------------------------------------------------------------------
// Counter-based RNG.
//
// A stateless bijective mix of (seed, stream, counter): the value of draw k
// on stream s depends only on (seed, s, k), so runs are reproducible and
// chains can be sharded without coordination.
// ---------------------------------------------------------------------------
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  explicit CounterRng(std::uint64_t seed_ = 0, std::uint64_t stream_ = 0)
      : seed(seed_), stream(stream_) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = mix(seed) ^ mix(mix(stream) + counter * 0xda942042e4dd58b5ULL);
    ++counter;
    return mix(z);
  }

  // Uniform in [0, n) by rejection (unbiased).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below(0)");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do { v = next_u64(); } while (v >= limit);
    return v % n;
  }

  double next_double() {  // uniform in [0,1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }
};

// ---------------------------------------------------------------------------
// Thread helper: splits [0, n) into contiguous chunks. Thread count comes
// from TILEPILE_THREADS (default: hardware concurrency).
// ---------------------------------------------------------------------------
inline unsigned thread_count() {
  if (const char* env = std::getenv("TILEPILE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  unsigned nt = thread_count();
  if (nt <= 1 || n < 2) { body(0, n); return; }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

// Mixed-radix index helpers for coordinates in [0,m)^d.
inline std::size_t fold_index(const std::vector<int>& x, int m) {
  std::size_t idx = 0;
  for (int c : x) idx = idx * std::size_t(m) + std::size_t(((c % m) + m) % m);
  return idx;
}
inline std::vector<int> unfold_index(std::size_t idx, int m, int d) {
  std::vector<int> x(d);
  for (int i = d - 1; i >= 0; --i) { x[i] = int(idx % std::size_t(m)); idx /= std::size_t(m); }
  return x;
}

inline std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// FNV-1a over a string; used to fingerprint spec files in tool output.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) { h ^= c; h *= 1099511628211ULL; }
  return h;
}

}  // namespace tilepile
