// Green's functions and random-walk Fourier analysis on periodic tilings.
//
// Two independent computational routes are kept deliberately separate:
//   * transfer-matrix formulas for the Fourier transforms of the stopped
//     walk measure and the Green's function (rho_hat / g_hat), and
//   * an exact per-frequency Bloch solve of the torus Laplacian
//     (greens_torus), which produces g * eta on all cells at once.
// The test suite cross-checks them against each other and against direct
// summation oracles.
#pragma once

#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>
#include <Eigen/Dense>

#include "common.hpp"
#include "tiling.hpp"

namespace tilepile {

using Complex = std::complex<double>;

struct PoleAtZero : std::runtime_error {
  PoleAtZero() : std::runtime_error("g_hat: frequency too close to the dual lattice") {}
};
struct SingularSolve : std::runtime_error {
  SingularSolve() : std::runtime_error("transfer matrix: (I - Q') numerically singular") {}
};
struct MeanNotZero : std::runtime_error {
  MeanNotZero() : std::runtime_error("greens_torus: input must have total mass zero") {}
};

// ---------------------------------------------------------------------------
// Stopped-walk measure: law of the walk started at v, stopped at its first
// positive-time visit to the distinguished lattice Lambda (= the cell-0
// copies).  Computed by iterative absorption with truncation residual
// below `residual_tol` (mass decays geometrically since every cell reaches
// cell 0).
// ---------------------------------------------------------------------------
struct StoppedWalkMeasure {
  std::map<std::vector<int>, double> mass;  // lattice point -> probability
  double residual = 0.0;

  std::vector<double> mean(int dim) const {
    std::vector<double> mu(dim, 0.0);
    for (const auto& [lam, p] : mass)
      for (int i = 0; i < dim; ++i) mu[i] += p * lam[i];
    return mu;
  }
};

inline StoppedWalkMeasure stopped_measure(const TilingSpec& spec, const Site& start,
                                          double residual_tol = 1e-14,
                                          int max_steps = 100000) {
  auto degs = spec.degrees();
  StoppedWalkMeasure out;
  std::unordered_map<Site, double, SiteHash> cur;
  // First positive time: always take at least one step.
  std::vector<std::pair<Site, std::int64_t>> nbrs;
  spec.neighbours(start, nbrs);
  for (auto& [t, mult] : nbrs) {
    double p = double(mult) / double(degs[start.cell]);
    if (t.cell == 0) out.mass[t.lam] += p;
    else cur[t] += p;
  }
  double live = 0;
  for (auto& [s, p] : cur) live += p;
  int steps = 0;
  while (live > residual_tol && steps++ < max_steps) {
    std::unordered_map<Site, double, SiteHash> next;
    for (const auto& [s, p] : cur) {
      spec.neighbours(s, nbrs);
      for (auto& [t, mult] : nbrs) {
        double q = p * double(mult) / double(degs[s.cell]);
        if (t.cell == 0) out.mass[t.lam] += q;
        else next[t] += q;
      }
    }
    cur = std::move(next);
    live = 0;
    for (auto& [s, p] : cur) live += p;
  }
  out.residual = live;
  if (live > residual_tol)
    throw std::runtime_error("stopped_measure: did not reach residual tolerance");
  return out;
}

// First-return measure from the lattice origin (the measure called rho):
// start at (cell 0, 0).
inline StoppedWalkMeasure first_return_measure(const TilingSpec& spec,
                                               double residual_tol = 1e-14) {
  return stopped_measure(spec, Site{0, std::vector<int>(spec.dim, 0)}, residual_tol);
}

// ---------------------------------------------------------------------------
// Conditional-expectation moment vectors: M(v) = E[position at the
// stopping time], in lattice coordinates.  By translation equivariance
// M(c, lam) = lam + x_c with x_0 = 0 and the x_c solving a small linear
// system over the non-zero cells.
// ---------------------------------------------------------------------------
inline std::vector<std::vector<double>> cell_moment_vectors(const TilingSpec& spec) {
  int k = spec.num_cells(), d = spec.dim;
  std::vector<std::vector<double>> x(k, std::vector<double>(d, 0.0));
  if (k == 1) return x;
  auto degs = spec.degrees();
  int unk = k - 1;  // cells 1..k-1
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(unk, unk);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(unk, d);
  for (int c = 1; c < k; ++c) {
    A(c - 1, c - 1) = 1.0;
    for (const auto& e : spec.edges) {
      if (e.from != c) continue;
      double w = double(e.mult) / double(degs[c]);
      for (int i = 0; i < d; ++i) B(c - 1, i) += w * e.offset[i];
      if (e.to != 0) A(c - 1, e.to - 1) -= w;
    }
  }
  Eigen::MatrixXd sol = A.partialPivLu().solve(B);
  for (int c = 1; c < k; ++c)
    for (int i = 0; i < d; ++i) x[c][i] = sol(c - 1, i);
  return x;
}

// ---------------------------------------------------------------------------
// Function classes.  A finitely supported function f on the tiling is
//   C0: integer valued (with finite l1 norm),
//   C1: additionally sum f = 0,
//   C2: additionally sum f(v) M(v) = 0.
// Returns the largest applicable class index (0, 1 or 2); throws if the
// values are not integers.
// ---------------------------------------------------------------------------
struct SiteValue {
  Site site;
  double value;
};

inline int classify(const TilingSpec& spec, const std::vector<SiteValue>& f,
                    double tol = 1e-10) {
  for (const auto& sv : f)
    if (std::abs(sv.value - std::round(sv.value)) > tol)
      throw std::invalid_argument("classify: function must be integer valued");
  double sum = 0;
  for (const auto& sv : f) sum += sv.value;
  if (std::abs(sum) > tol) return 0;
  auto xc = cell_moment_vectors(spec);
  std::vector<double> mom(spec.dim, 0.0);
  for (const auto& sv : f)
    for (int i = 0; i < spec.dim; ++i)
      mom[i] += sv.value * (sv.site.lam[i] + xc[sv.site.cell][i]);
  for (double m : mom)
    if (std::abs(m) > tol) return 1;
  return 2;
}

// Smoothness order rho of the tiling dimension (the class required of
// Laplacian prevectors for square-summable potentials).
inline int rho_of_dim(int d) {
  if (d <= 2) return 2;
  if (d <= 4) return 1;
  return 0;
}

// ---------------------------------------------------------------------------
// Transfer-matrix Fourier formulas.
//
// Q(x) is the cell-to-cell step matrix with edge weights e(-x . o) keyed
// by the floor-coordinate change o of the step:
//   Q_ij(x) = (1/deg_i) sum_{edges i->j, offset o} mult * e(-x.o).
// Then with Q' = Q minus row/column 0, r0 = row 0 of Q without the 0
// entry, c0 = column 0 without the 0 entry:
//   rho_hat(x) = Q_00 + r0 (I - Q')^{-1} c0,
//   deg0 * g_hat(x) = 1 / (1 - rho_hat(x)).
// ---------------------------------------------------------------------------
inline Eigen::MatrixXcd transfer_matrix(const TilingSpec& spec,
                                        const std::vector<double>& x) {
  int k = spec.num_cells();
  auto degs = spec.degrees();
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(k, k);
  for (const auto& e : spec.edges) {
    double phase = 0;
    for (int i = 0; i < spec.dim; ++i) phase += x[i] * e.offset[i];
    Q(e.from, e.to) += double(e.mult) / double(degs[e.from]) *
                       std::exp(Complex(0, -2.0 * M_PI * phase));
  }
  return Q;
}

inline Complex rho_hat(const TilingSpec& spec, const std::vector<double>& x) {
  int k = spec.num_cells();
  Eigen::MatrixXcd Q = transfer_matrix(spec, x);
  if (k == 1) return Q(0, 0);
  Eigen::MatrixXcd Qp = Q.block(1, 1, k - 1, k - 1);
  Eigen::VectorXcd c0 = Q.block(1, 0, k - 1, 1);
  Eigen::RowVectorXcd r0 = Q.block(0, 1, 1, k - 1);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(k - 1, k - 1) - Qp;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  Eigen::VectorXcd sol = lu.solve(c0);
  if ((M * sol - c0).norm() <= 1e-9 * (1.0 + c0.norm()))
    return Q(0, 0) + (r0 * sol)(0, 0);
  // Fallback: Neumann series sum_n Q'^n c0 (substochastic, converges when
  // the solve is merely ill-conditioned, else we give up).
  Eigen::VectorXcd term = c0, acc = c0;
  for (int n = 1; n <= 100000; ++n) {
    term = Qp * term;
    acc += term;
    if (term.norm() < 1e-15) return Q(0, 0) + (r0 * acc)(0, 0);
  }
  throw SingularSolve();
}

inline Complex g_hat(const TilingSpec& spec, const std::vector<double>& x,
                     double pole_tol = 1e-9) {
  double dist2 = 0;
  for (double xi : x) {
    double f = xi - std::round(xi);
    dist2 += f * f;
  }
  if (std::sqrt(dist2) < pole_tol) throw PoleAtZero();
  double deg0 = double(spec.degree(0));
  return 1.0 / (deg0 * (1.0 - rho_hat(spec, x)));
}

// ---------------------------------------------------------------------------
// Torus fields and the Bloch/FFT Green's solver.
// ---------------------------------------------------------------------------
struct TorusField {
  const TilingSpec* spec = nullptr;
  int m = 0;
  std::vector<std::vector<double>> data;  // [cell][m^d], mixed-radix index

  std::size_t points_per_cell() const { return ipow(std::size_t(m), spec->dim); }

  double& at(int cell, std::size_t idx) { return data[cell][idx]; }
  double at(int cell, std::size_t idx) const { return data[cell][idx]; }

  double at_site(const Site& s) const {
    return data[s.cell][fold_index(s.lam, m)];
  }
  double& at_site(const Site& s) {
    return data[s.cell][fold_index(s.lam, m)];
  }

  double total() const {
    double t = 0;
    for (const auto& v : data)
      for (double x : v) t += x;
    return t;
  }
};

inline TorusField make_field(const TilingSpec& spec, int m) {
  TorusField f;
  f.spec = &spec;
  f.m = m;
  f.data.assign(spec.num_cells(), std::vector<double>(ipow(std::size_t(m), spec.dim), 0.0));
  return f;
}

// Graph Laplacian (D - A) applied on the torus; used as the primary
// correctness check Delta(greens_torus(eta)) == eta.
inline TorusField apply_laplacian(const TorusField& f) {
  const TilingSpec& spec = *f.spec;
  int m = f.m, d = spec.dim;
  auto degs = spec.degrees();
  TorusField out = make_field(spec, m);
  std::size_t N = f.points_per_cell();
  // Precompute per-edge folded strides is awkward for general d; iterate
  // coordinates explicitly.
  std::vector<int> lam(d, 0);
  for (std::size_t idx = 0; idx < N; ++idx) {
    for (int c = 0; c < spec.num_cells(); ++c) {
      double acc = double(degs[c]) * f.data[c][idx];
      for (const auto& e : spec.edges) {
        if (e.from != c) continue;
        std::size_t nidx = 0;
        for (int i = 0; i < d; ++i) {
          int v = lam[i] + e.offset[i];
          v %= m;
          if (v < 0) v += m;
          nidx = nidx * std::size_t(m) + std::size_t(v);
        }
        acc -= double(e.mult) * f.data[e.to][nidx];
      }
      out.data[c][idx] = acc;
    }
    int i = d - 1;
    while (i >= 0 && lam[i] == m - 1) { lam[i] = 0; --i; }
    if (i >= 0) ++lam[i];
  }
  return out;
}

namespace detail {

// Cached FFTW plans per (dim, m); FFTW planning is not thread-safe, and
// plans are reused across the many solves of a spectral search.
struct FftCache {
  std::mutex mu;
  std::map<std::pair<int, int>, std::pair<fftw_plan, fftw_plan>> plans;
  std::map<std::pair<int, int>, std::vector<Complex>> buffers;

  // In-place transforms on `buf` (size m^d).
  void run(int d, int m, std::vector<Complex>& buf, bool forward) {
    std::unique_lock<std::mutex> lock(mu);
    auto key = std::make_pair(d, m);
    auto it = plans.find(key);
    if (it == plans.end()) {
      std::vector<int> dims(d, m);
      auto& scratch = buffers[key];
      scratch.assign(ipow(std::size_t(m), d), Complex(0, 0));
      fftw_complex* p = reinterpret_cast<fftw_complex*>(scratch.data());
      fftw_plan fwd = fftw_plan_dft(d, dims.data(), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
      fftw_plan bwd = fftw_plan_dft(d, dims.data(), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
      it = plans.emplace(key, std::make_pair(fwd, bwd)).first;
    }
    auto& scratch = buffers[key];
    scratch = buf;
    fftw_complex* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_execute_dft(forward ? it->second.first : it->second.second, p, p);
    buf = scratch;
  }
};

inline FftCache& fft_cache() {
  static FftCache cache;
  return cache;
}

}  // namespace detail

// Solves Delta g = eta on the torus T_m exactly in Fourier space: one
// |cells| x |cells| Bloch block per frequency.
//
// * point_mode = false: eta must have total mass zero (MeanNotZero
//   otherwise).  The zero-frequency block is solved in the mean-zero
//   complement, so Delta g == eta exactly and sum g = 0.
// * point_mode = true: eta is taken as delta at (cell 0, 0); the zero
//   mode is dropped, which realizes Delta g = delta_0 - m^{-d} delta_Lambda
//   with g mean-zero on every cell class (the canonical torus Green's
//   function).
inline TorusField greens_torus(const TilingSpec& spec, int m,
                               const std::vector<SiteValue>& eta,
                               bool point_mode = false) {
  int d = spec.dim, k = spec.num_cells();
  std::size_t N = ipow(std::size_t(m), d);
  auto degs = spec.degrees();

  std::vector<std::vector<Complex>> hat(k, std::vector<Complex>(N, Complex(0, 0)));
  double scale = 0;
  if (point_mode) {
    hat[0][0] = Complex(1, 0);
    // Delta at the origin: constant 1 across frequencies after transform;
    // fill directly instead of running an FFT on a delta.
    std::fill(hat[0].begin(), hat[0].end(), Complex(1, 0));
    scale = 1;
  } else {
    double total = 0;
    for (const auto& sv : eta) {
      hat[sv.site.cell][fold_index(sv.site.lam, m)] += sv.value;
      total += sv.value;
      scale += std::abs(sv.value);
    }
    if (std::abs(total) > 1e-9 * std::max(1.0, scale)) throw MeanNotZero();
    for (int c = 0; c < k; ++c) detail::fft_cache().run(d, m, hat[c], true);
  }

  // Twiddle table and per-edge reduced offsets.
  std::vector<Complex> omega(m);
  for (int j = 0; j < m; ++j)
    omega[j] = std::exp(Complex(0, -2.0 * M_PI * j / m));
  struct Edge {
    int from, to;
    double mult;
    std::array<int, 8> off;
  };
  std::vector<Edge> edges;
  for (const auto& e : spec.edges) {
    Edge ed;
    ed.from = e.from;
    ed.to = e.to;
    ed.mult = double(e.mult);
    // With the forward-FFT convention e(-k.lam/m), the shift lam -> lam+o
    // contributes e(+k.o/m); store the negated offset so the omega table
    // (which holds e(-j/m)) produces that phase.
    for (int i = 0; i < d; ++i) ed.off[i] = (((-e.offset[i]) % m) + m) % m;
    edges.push_back(ed);
  }

  Eigen::MatrixXcd L(k, k);
  Eigen::VectorXcd rhs(k), sol(k);
  std::vector<int> kvec(d, 0);
  for (std::size_t f = 0; f < N; ++f) {
    if (f == 0) {
      if (point_mode) {
        for (int c = 0; c < k; ++c) hat[c][0] = Complex(0, 0);
      } else {
        // Mean-zero solve of the singular quotient Laplacian: L0 + J is
        // invertible and returns the component-mean-zero solution when
        // the right-hand side sums to zero.
        L.setZero();
        for (int c = 0; c < k; ++c) L(c, c) = double(degs[c]);
        for (const auto& e : edges) L(e.from, e.to) -= e.mult;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) L(i, j) += 1.0;
        for (int c = 0; c < k; ++c) rhs(c) = hat[c][0];
        sol = L.partialPivLu().solve(rhs);
        for (int c = 0; c < k; ++c) hat[c][0] = sol(c);
      }
    } else if (k == 1) {
      Complex l(double(degs[0]), 0);
      for (const auto& e : edges) {
        int ph = 0;
        for (int i = 0; i < d; ++i) ph += kvec[i] * e.off[i];
        l -= e.mult * omega[ph % m];
      }
      hat[0][f] /= l;
    } else {
      L.setZero();
      for (int c = 0; c < k; ++c) L(c, c) = double(degs[c]);
      for (const auto& e : edges) {
        int ph = 0;
        for (int i = 0; i < d; ++i) ph += kvec[i] * e.off[i];
        L(e.from, e.to) -= e.mult * omega[ph % m];
      }
      for (int c = 0; c < k; ++c) rhs(c) = hat[c][f];
      sol = L.partialPivLu().solve(rhs);
      for (int c = 0; c < k; ++c) hat[c][f] = sol(c);
    }
    int i = d - 1;
    while (i >= 0 && kvec[i] == m - 1) { kvec[i] = 0; --i; }
    if (i >= 0) ++kvec[i];
  }

  TorusField out = make_field(spec, m);
  for (int c = 0; c < k; ++c) {
    detail::fft_cache().run(d, m, hat[c], false);
    double inv = 1.0 / double(N);
    for (std::size_t i = 0; i < N; ++i) out.data[c][i] = hat[c][i].real() * inv;
  }
  return out;
}

inline TorusField greens_torus_point(const TilingSpec& spec, int m) {
  return greens_torus(spec, m, {}, /*point_mode=*/true);
}

// ---------------------------------------------------------------------------
// Infinite-volume values by two-level torus extrapolation.
//
// For eta of class C^j the torus value differs from the infinite one by
// periodic-image terms of size O(m^-(d-2+j)); Richardson extrapolation at
// that exponent gives the value plus an honest error estimate (the size of
// the applied correction).  For the point Green's function in d = 2 the
// additive normalization drifts with m, so only differences/gradients of
// the returned values are meaningful there (error reported as the raw
// two-level difference).
// ---------------------------------------------------------------------------
struct InfiniteValues {
  std::vector<double> values;  // aligned with the query sites
  double error_estimate = 0;
};

inline InfiniteValues greens_infinite(const TilingSpec& spec,
                                      const std::vector<SiteValue>& eta,
                                      const std::vector<Site>& queries,
                                      int m1 = 0, bool point_mode = false) {
  int d = spec.dim;
  int cls = point_mode ? -1 : classify(spec, eta);
  int p = point_mode ? (d - 2) : (d - 2 + cls);
  if (m1 <= 0) m1 = d == 2 ? 128 : d == 3 ? 64 : 32;
  // The coarse torus must still contain the queries without wrap-around.
  for (const auto& q : queries)
    for (int c : q.lam)
      if (std::abs(c) * 3 >= m1) m1 = std::max(m1, 3 * std::abs(c) + 1);
  TorusField f1 = point_mode ? greens_torus_point(spec, m1)
                             : greens_torus(spec, m1, eta);
  TorusField f2 = point_mode ? greens_torus_point(spec, 2 * m1)
                             : greens_torus(spec, 2 * m1, eta);
  InfiniteValues out;
  double maxdiff = 0;
  for (const auto& q : queries) {
    double v1 = f1.at_site(q), v2 = f2.at_site(q);
    double diff = v2 - v1;
    maxdiff = std::max(maxdiff, std::abs(diff));
    if (p >= 1) {
      double corr = diff / (std::pow(2.0, p) - 1.0);
      out.values.push_back(v2 + corr);
    } else {
      out.values.push_back(v2);
    }
  }
  out.error_estimate = p >= 1 ? maxdiff / (std::pow(2.0, p) - 1.0) : maxdiff;
  return out;
}

// Forward difference along a lattice direction on a torus field.
inline TorusField discrete_derivative(const TorusField& f, int axis) {
  const TilingSpec& spec = *f.spec;
  int m = f.m, d = spec.dim;
  TorusField out = make_field(spec, m);
  std::size_t N = f.points_per_cell();
  std::vector<int> lam(d, 0);
  for (std::size_t idx = 0; idx < N; ++idx) {
    std::size_t nidx = 0;
    for (int i = 0; i < d; ++i) {
      int v = lam[i] + (i == axis ? 1 : 0);
      v %= m;
      nidx = nidx * std::size_t(m) + std::size_t(v);
    }
    for (int c = 0; c < spec.num_cells(); ++c)
      out.data[c][idx] = f.data[c][nidx] - f.data[c][idx];
    int i = d - 1;
    while (i >= 0 && lam[i] == m - 1) { lam[i] = 0; --i; }
    if (i >= 0) ++lam[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local limit check for the half-lazy first-return measure
// rho_1/2 = (delta_0 + rho)/2 on Lambda: convolution powers on a window,
// compared in sup norm against the matching Gaussian density.  Returns the
// scaled errors N^{d/2} * sup |rho_1/2^{*N} - gauss| on a dyadic ladder;
// the check passes when they are bounded and non-increasing from N = 64.
// ---------------------------------------------------------------------------
struct LocalLimitReport {
  std::vector<int> ns;
  std::vector<double> scaled_errors;
  bool pass = false;
};

inline LocalLimitReport local_limit_check(const TilingSpec& spec, int n_max = 256,
                                          int window = 0) {
  int d = spec.dim;
  if (d > 3) throw std::invalid_argument("local_limit_check: supported for d <= 3");
  auto rho = first_return_measure(spec);
  // Covariance of the half-lazy measure (mean is zero by symmetry of rho).
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  int reach = 0;
  for (const auto& [lam, p] : rho.mass) {
    for (int i = 0; i < d; ++i) {
      reach = std::max(reach, std::abs(lam[i]));
      for (int j = 0; j < d; ++j) cov(i, j) += 0.5 * p * lam[i] * lam[j];
    }
  }
  if (window <= 0) {
    double smax = std::sqrt(cov.eigenvalues().real().maxCoeff());
    int need = int(8 * smax * std::sqrt(double(n_max))) + 2 * reach + 8;
    window = 1;
    while (window < need) window *= 2;
  }
  std::size_t N = ipow(std::size_t(window), d);
  std::vector<Complex> base(N, Complex(0, 0));
  auto fold = [&](const std::vector<int>& lam) {
    std::size_t idx = 0;
    for (int c : lam) idx = idx * window + std::size_t(((c % window) + window) % window);
    return idx;
  };
  base[0] += 0.5;
  for (const auto& [lam, p] : rho.mass) base[fold(lam)] += 0.5 * p;
  detail::fft_cache().run(d, window, base, true);

  Eigen::MatrixXd covinv = cov.inverse();
  double covdet = cov.determinant();
  LocalLimitReport rep;
  for (int n = 64; n <= n_max; n *= 2) {
    std::vector<Complex> powed(N);
    for (std::size_t i = 0; i < N; ++i) powed[i] = std::pow(base[i], n);
    detail::fft_cache().run(d, window, powed, false);
    double sup = 0;
    std::vector<int> lam(d, 0);
    double norm = std::pow(2.0 * M_PI * n, -0.5 * d) / std::sqrt(covdet);
    for (std::size_t idx = 0; idx < N; ++idx) {
      double conv = powed[idx].real() / double(N);
      // Signed coordinates on the window torus.
      double quad = 0;
      for (int i = 0; i < d; ++i) {
        int xi = lam[i] <= window / 2 ? lam[i] : lam[i] - window;
        for (int j = 0; j < d; ++j) {
          int xj = lam[j] <= window / 2 ? lam[j] : lam[j] - window;
          quad += xi * covinv(i, j) * xj;
        }
      }
      double gauss = norm * std::exp(-0.5 * quad / n);
      sup = std::max(sup, std::abs(conv - gauss));
      int i = d - 1;
      while (i >= 0 && lam[i] == window - 1) { lam[i] = 0; --i; }
      if (i >= 0) ++lam[i];
    }
    rep.ns.push_back(n);
    rep.scaled_errors.push_back(std::pow(double(n), 0.5 * d) * sup);
  }
  rep.pass = true;
  for (std::size_t i = 1; i < rep.scaled_errors.size(); ++i)
    if (rep.scaled_errors[i] > rep.scaled_errors[i - 1] * (1 + 1e-9)) rep.pass = false;
  return rep;
}

}  // namespace tilepile
