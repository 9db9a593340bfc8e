// Abelian sandpile dynamics on a finite graph with sink: stabilization
// with odometer, the group operation on recurrent configurations, the
// identity element, Dhar's burning test, and the one-step dynamics of the
// uniform-site measure.
//
// Chip counts are 64-bit; any overflow is a hard error, never a wrap.
#pragma once

#include <deque>
#include <vector>

#include "common.hpp"
#include "snf.hpp"
#include "tiling.hpp"

namespace tilepile {

using Configuration = std::vector<std::int64_t>;

struct StabilizeResult {
  Configuration config;
  std::vector<std::int64_t> odometer;  // topplings per vertex
};

inline void checked_iadd(std::int64_t& a, std::int64_t b) {
  if (__builtin_add_overflow(a, b, &a))
    throw std::overflow_error("sandpile: chip count overflow");
}

// Queue-based stabilization with multi-toppling: an unstable vertex fires
// floor(chips/deg) times at once.  Terminates for any configuration with
// non-negative chip counts on a graph whose sink is reachable.
inline StabilizeResult stabilize(const FiniteSandpileGraph& g, Configuration sigma) {
  if (int(sigma.size()) != g.n)
    throw std::invalid_argument("stabilize: configuration size mismatch");
  StabilizeResult res;
  res.odometer.assign(g.n, 0);
  std::deque<int> queue;
  std::vector<char> queued(g.n, 0);
  for (int v = 0; v < g.n; ++v) {
    if (sigma[v] < 0) throw std::invalid_argument("stabilize: negative chip count");
    if (sigma[v] >= g.deg[v]) { queue.push_back(v); queued[v] = 1; }
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    if (sigma[v] < g.deg[v]) continue;
    std::int64_t t = sigma[v] / g.deg[v];
    checked_iadd(res.odometer[v], t);
    sigma[v] -= t * g.deg[v];
    for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k) {
      auto [w, mult] = g.adj[k];
      if (w == g.sink()) continue;
      std::int64_t give;
      if (__builtin_mul_overflow(t, mult, &give))
        throw std::overflow_error("sandpile: chip count overflow");
      checked_iadd(sigma[w], give);
      if (sigma[w] >= g.deg[w] && !queued[w]) { queue.push_back(w); queued[w] = 1; }
    }
  }
  res.config = std::move(sigma);
  return res;
}

inline bool is_stable(const FiniteSandpileGraph& g, const Configuration& sigma) {
  for (int v = 0; v < g.n; ++v)
    if (sigma[v] >= g.deg[v]) return false;
  return true;
}

inline Configuration sigma_full(const FiniteSandpileGraph& g) {
  Configuration s(g.n);
  for (int v = 0; v < g.n; ++v) s[v] = g.deg[v] - 1;
  return s;
}

// Pointwise sum followed by stabilization (the group operation when both
// arguments are recurrent).
inline Configuration op_add(const FiniteSandpileGraph& g, const Configuration& a,
                            const Configuration& b) {
  Configuration s(g.n);
  for (int v = 0; v < g.n; ++v) {
    s[v] = a[v];
    checked_iadd(s[v], b[v]);
  }
  return stabilize(g, std::move(s)).config;
}

// The "burner" b = sigma_full + (sigma_full - (2 sigma_full)^o): adding b
// to any configuration and stabilizing lands on the recurrent
// representative of its equivalence class (b >= sigma_full pointwise and
// b is trivial in the group).
inline Configuration burner(const FiniteSandpileGraph& g) {
  Configuration two(g.n);
  for (int v = 0; v < g.n; ++v) two[v] = 2 * (g.deg[v] - 1);
  Configuration stab = stabilize(g, two).config;
  Configuration b(g.n);
  for (int v = 0; v < g.n; ++v) b[v] = 2 * (g.deg[v] - 1) - stab[v];
  return b;
}

inline Configuration identity_element(const FiniteSandpileGraph& g) {
  return stabilize(g, burner(g)).config;
}

// Recurrent representative of the class of sigma.
inline Configuration recurrent_representative(const FiniteSandpileGraph& g,
                                              Configuration sigma) {
  Configuration b = burner(g);
  for (int v = 0; v < g.n; ++v) checked_iadd(sigma[v], b[v]);
  return stabilize(g, std::move(sigma)).config;
}

// Dhar burning test: fire the sink once (each vertex receives its
// multiplicity of edges to the sink) and stabilize; sigma is recurrent iff
// every vertex topples exactly once, returning to sigma.
inline bool is_recurrent(const FiniteSandpileGraph& g, const Configuration& sigma) {
  if (!is_stable(g, sigma)) return false;
  Configuration s = sigma;
  for (int v = 0; v < g.n; ++v)
    for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k)
      if (g.adj[k].first == g.sink()) checked_iadd(s[v], g.adj[k].second);
  auto res = stabilize(g, std::move(s));
  for (int v = 0; v < g.n; ++v)
    if (res.odometer[v] != 1) return false;
  return res.config == sigma;
}

// Integer scalar multiple k . a in the sandpile group: stabilize(k * a),
// mapped back to the recurrent representative.
inline Configuration op_scale(const FiniteSandpileGraph& g, const Configuration& a,
                              const BigInt& k) {
  if (k <= 0) throw std::invalid_argument("op_scale: k must be positive");
  // Work with 64-bit chips: split k into digits base 2^20 and use the
  // abelian property (stabilize(k a) = fold of scaled stabilizations).
  const std::int64_t base = 1 << 20;
  std::vector<std::int64_t> digits;
  BigInt kk = k;
  while (kk > 0) {
    digits.push_back(std::int64_t(kk % base));
    kk /= base;
  }
  // Horner from the top digit: acc = ((d_t * a)^o ... ) with acc scaled by
  // `base` between digits; every intermediate stays within 64 bits.
  Configuration acc(g.n, 0);
  for (int i = int(digits.size()) - 1; i >= 0; --i) {
    Configuration s(g.n);
    for (int v = 0; v < g.n; ++v) {
      std::int64_t scaled;
      if (__builtin_mul_overflow(acc[v], base, &scaled))
        throw std::overflow_error("op_scale: overflow");
      s[v] = scaled;
      std::int64_t add;
      if (__builtin_mul_overflow(a[v], digits[i], &add))
        throw std::overflow_error("op_scale: overflow");
      checked_iadd(s[v], add);
    }
    acc = stabilize(g, std::move(s)).config;
  }
  return acc;
}

// Group inverse via order exponentiation: (N-1).a with N = |det Delta'|,
// then the recurrent representative.
inline Configuration op_inverse(const FiniteSandpileGraph& g, const Configuration& a,
                                const BigInt& group_order) {
  if (group_order < 2) return recurrent_representative(g, a);
  Configuration s = op_scale(g, a, group_order - 1);
  return recurrent_representative(g, std::move(s));
}

inline BigInt group_order(const FiniteSandpileGraph& g) {
  BigInt d = bareiss_det(reduced_laplacian_big(g));
  return d < 0 ? BigInt(-d) : d;
}

// One step of the uniform-site dynamics mu = (1/|V|)(delta_id + sum_v
// delta_v): with probability 1/|V| do nothing (|V| counts the sink),
// otherwise add a chip at a uniform non-sink vertex and stabilize.
inline void step(const FiniteSandpileGraph& g, Configuration& sigma, CounterRng& rng) {
  std::uint64_t r = rng.next_below(std::uint64_t(g.n) + 1);
  if (r == std::uint64_t(g.n)) return;
  checked_iadd(sigma[int(r)], 1);
  sigma = stabilize(g, std::move(sigma)).config;
}

}  // namespace tilepile
