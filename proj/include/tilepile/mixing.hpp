// Mixing analysis of sandpile dynamics.
//
// The one-step kernel is the uniform-site measure mu = (1/|V|)(delta_id +
// sum_{v != s} delta_{add v}); its Fourier coefficients over the sandpile
// group are mu_hat(xi) = (1 + sum_v e(xi_v)) / |V| for dual characters
// xi in (Delta')^{-1} Z^{V \ s} / Z^{V \ s}.
//
// Provided here: exact dual-group enumeration through the Smith normal
// form, exact L2 / total-variation profiles on brute-forceable groups, a
// certified total-variation lower-bound witness, a spectral-gap scan
// through small-prevector characters, and Monte Carlo mixing profiles
// with a translate-family statistic for cut-off measurements.
#pragma once

#include <complex>
#include <numeric>

#include <fftw3.h>

#include "common.hpp"
#include "greens.hpp"
#include "sandpile.hpp"
#include "snf.hpp"
#include "spectral.hpp"
#include "tiling.hpp"

namespace tilepile {

struct GroupTooLarge : std::runtime_error {
  explicit GroupTooLarge(const std::string& what) : std::runtime_error(what) {}
};

inline std::complex<double> unit_phase(double x) {
  return {std::cos(2.0 * M_PI * x), std::sin(2.0 * M_PI * x)};
}

// A dual character: xi on V \ {s}.  When constructed from the SNF the
// exact value is num[v]/den mod 1; characters obtained from linear solves
// carry den = 0 and only the real xi.
struct DualCharacter {
  std::vector<double> xi;
  std::vector<std::int64_t> num;  // exact numerators (den > 0 only)
  std::int64_t den = 0;
  std::complex<double> mu_hat;
};

inline std::complex<double> mu_hat_of(const std::vector<double>& xi) {
  std::complex<double> s = 1.0;  // the lazy identity step
  for (double x : xi) s += unit_phase(x);
  return s / double(xi.size() + 1);
}

// ---------------------------------------------------------------------------
// Dual group through the Smith normal form: U Delta' V = D gives
// G = Z^n / Delta' Z^n  ~  (+) Z/d_i  via  phi(x) = (U x) mod D, and the
// character attached to the tuple k is xi = U^T D^{-1} k.
// ---------------------------------------------------------------------------
struct DualGroupInfo {
  int n = 0;
  BigInt order = 1;
  std::vector<std::int64_t> dims;  // nontrivial invariant factors d_i > 1
  std::int64_t dn = 1;             // largest factor: common denominator
  // W(i, v) = U(i, v) * (dn / d_i) mod dn for the nontrivial rows i.
  std::vector<std::vector<std::int64_t>> W;
  // phi(e_v) in SNF coordinates: column v of U mod d_i per nontrivial row.
  std::vector<std::vector<std::int64_t>> phi_cols;  // [v][i]
};

inline DualGroupInfo analyze_group(const FiniteSandpileGraph& g, double cap = 1e7) {
  DualGroupInfo info;
  info.n = g.n;
  SNFDecomposition snf = smith_normal_form(reduced_laplacian_big(g));
  if (int(snf.invariant_factors.size()) != g.n)
    throw std::invalid_argument("analyze_group: reduced Laplacian is singular");
  std::vector<int> rows;
  for (int i = 0; i < g.n; ++i) {
    const BigInt& d = snf.invariant_factors[i];
    info.order *= d;
    if (d > 1) {
      if (d > BigInt(std::int64_t(1) << 60))
        throw GroupTooLarge("analyze_group: invariant factor exceeds 2^60");
      info.dims.push_back(std::int64_t(d));
      rows.push_back(i);
    }
  }
  if (info.order > BigInt(std::uint64_t(cap)))
    throw GroupTooLarge("analyze_group: |G| exceeds cap");
  info.dn = info.dims.empty() ? 1 : info.dims.back();
  int r = int(rows.size());
  info.W.assign(r, std::vector<std::int64_t>(g.n));
  info.phi_cols.assign(g.n, std::vector<std::int64_t>(r));
  for (int k = 0; k < r; ++k) {
    int i = rows[k];
    std::int64_t scale = info.dn / info.dims[k];
    for (int v = 0; v < g.n; ++v) {
      BigInt u = snf.U(i, v) % info.dn;
      std::int64_t um = std::int64_t(u < 0 ? u + info.dn : u);
      info.W[k][v] = (um % info.dn) * (scale % info.dn) % info.dn;
      BigInt p = snf.U(i, v) % info.dims[k];
      info.phi_cols[v][k] = std::int64_t(p < 0 ? p + info.dims[k] : p);
    }
  }
  return info;
}

inline DualCharacter character_from_tuple(const DualGroupInfo& info,
                                          const std::vector<std::int64_t>& k) {
  DualCharacter c;
  c.den = info.dn;
  c.num.assign(info.n, 0);
  c.xi.assign(info.n, 0.0);
  for (int v = 0; v < info.n; ++v) {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < info.dims.size(); ++i) {
      // Scale k_i to the common denominator before the row product.
      std::int64_t ki = k[i] % info.dims[i];
      acc = (acc + std::int64_t((__int128)ki * info.W[i][v] % info.dn)) % info.dn;
    }
    c.num[v] = acc;
    c.xi[v] = double(acc) / double(info.dn);
  }
  c.mu_hat = mu_hat_of(c.xi);
  return c;
}

// Enumerate the nonzero dual characters, calling fn for each.
template <typename Fn>
inline void enumerate_dual(const FiniteSandpileGraph& g, Fn&& fn, double cap = 1e7) {
  DualGroupInfo info = analyze_group(g, cap);
  std::vector<std::int64_t> k(info.dims.size(), 0);
  for (;;) {
    int i = int(info.dims.size()) - 1;
    while (i >= 0 && k[i] == info.dims[i] - 1) { k[i] = 0; --i; }
    if (i < 0) break;
    ++k[i];
    fn(character_from_tuple(info, k));
  }
}

inline std::vector<DualCharacter> enumerate_dual_vector(const FiniteSandpileGraph& g,
                                                        double cap = 1e6) {
  std::vector<DualCharacter> out;
  enumerate_dual(g, [&](DualCharacter&& c) { out.push_back(std::move(c)); }, cap);
  return out;
}

// ---------------------------------------------------------------------------
// Profiles.
// ---------------------------------------------------------------------------
struct MixingSample {
  std::int64_t N = 0;
  double l2 = std::numeric_limits<double>::quiet_NaN();
  double tv_upper = std::numeric_limits<double>::quiet_NaN();
  double tv_lower = std::numeric_limits<double>::quiet_NaN();
  double obs_re = std::numeric_limits<double>::quiet_NaN();
  double obs_im = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

struct MixingProfile {
  std::string graph;
  std::vector<MixingSample> samples;
  double t_mix = -1;        // first N with the tracked distance < 1/e
  double width = -1;        // N at 0.25 minus N at 0.75 (profile width)
  double t_pred = -1;       // theory prediction when supplied
};

namespace detail {
// Linear interpolation of the first crossing of `level` (curve decreasing).
inline double first_crossing(const std::vector<MixingSample>& rows, double level,
                             double MixingSample::* field) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double y = rows[i].*field;
    if (std::isnan(y)) continue;
    if (y < level) {
      if (i == 0) return double(rows[0].N);
      double y0 = rows[i - 1].*field, n0 = double(rows[i - 1].N), n1 = double(rows[i].N);
      if (std::isnan(y0) || y0 <= y) return n1;
      return n0 + (n1 - n0) * (y0 - level) / (y0 - y);
    }
  }
  return -1;
}
}  // namespace detail

// Exact L2 profile from the full dual enumeration (Kahan-summed):
// ||mu^N - U||_2^2 = sum_{xi != 0} |mu_hat(xi)|^{2N}; tv_upper = L2 / 2.
inline MixingProfile l2_profile(const FiniteSandpileGraph& g,
                                const std::vector<std::int64_t>& steps,
                                double cap = 1e7) {
  std::vector<double> mod2;
  enumerate_dual(g, [&](DualCharacter&& c) { mod2.push_back(std::norm(c.mu_hat)); },
                 cap);
  MixingProfile prof;
  for (std::int64_t N : steps) {
    double sum = 0, comp = 0;  // Kahan
    for (double m2 : mod2) {
      double term = std::pow(m2, double(N)) - comp;
      double t = sum + term;
      comp = (t - sum) - term;
      sum = t;
    }
    MixingSample row;
    row.N = N;
    row.l2 = std::sqrt(sum);
    row.tv_upper = 0.5 * row.l2;
    prof.samples.push_back(row);
  }
  prof.t_mix = detail::first_crossing(prof.samples, 1.0 / M_E, &MixingSample::tv_upper);
  return prof;
}

// ---------------------------------------------------------------------------
// Exact distribution of the walk in SNF coordinates (brute-force scale).
// The walk on G has increments phi(e_v) with weight 1/|V| plus a lazy
// hold; the N-step law is recovered by an FFT over the invariant-factor
// grid and an elementwise power.
// ---------------------------------------------------------------------------
class ExactGroupWalk {
 public:
  ExactGroupWalk(const FiniteSandpileGraph& g, double cap = 1e5)
      : info_(analyze_group(g, cap)) {
    size_ = 1;
    for (std::int64_t d : info_.dims) size_ *= std::size_t(d);
    if (size_ == 0) size_ = 1;
    std::vector<double> mass(size_, 0.0);
    double w = 1.0 / double(g.n + 1);
    mass[0] += w;  // lazy step
    for (int v = 0; v < g.n; ++v) mass[index_of(info_.phi_cols[v])] += w;
    muhat_.assign(size_, 0.0);
    fft(mass.data(), muhat_.data(), FFTW_FORWARD);
  }

  std::size_t group_size() const { return size_; }

  // Law of the walk after N steps, as a flat array over the SNF grid.
  std::vector<double> distribution(std::int64_t N) const {
    std::vector<std::complex<double>> hatN(size_);
    for (std::size_t i = 0; i < size_; ++i) hatN[i] = powi(muhat_[i], N);
    std::vector<std::complex<double>> out(size_);
    fft_c(hatN.data(), out.data(), FFTW_BACKWARD);
    std::vector<double> p(size_);
    for (std::size_t i = 0; i < size_; ++i) p[i] = out[i].real() / double(size_);
    return p;
  }

  double exact_tv(std::int64_t N) const {
    std::vector<double> p = distribution(N);
    double u = 1.0 / double(size_);
    long double acc = 0;
    for (double x : p) acc += std::abs(x - u);
    return double(acc) / 2.0;
  }

  // Parseval cross-check: sum_g (P_N(g) - u)^2 computed from the
  // distribution versus (1/|G|) sum_{k != 0} |mu_hat^N|^2.
  double parseval_gap(std::int64_t N) const {
    std::vector<double> p = distribution(N);
    double u = 1.0 / double(size_);
    long double direct = 0;
    for (double x : p) direct += (x - u) * (x - u);
    long double fourier = 0;
    for (std::size_t i = 1; i < size_; ++i)
      fourier += std::pow(std::norm(muhat_[i]), double(N));
    fourier /= double(size_);
    return double(std::abs(direct - fourier));
  }

  const std::vector<std::complex<double>>& muhat_grid() const { return muhat_; }
  const DualGroupInfo& info() const { return info_; }

 private:
  std::size_t index_of(const std::vector<std::int64_t>& coord) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < info_.dims.size(); ++i)
      idx = idx * std::size_t(info_.dims[i]) + std::size_t(coord[i]);
    return idx;
  }

  static std::complex<double> powi(std::complex<double> b, std::int64_t e) {
    std::complex<double> r = 1.0;
    while (e > 0) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  void fft(const double* in, std::complex<double>* out, int sign) const {
    std::vector<std::complex<double>> cin(size_);
    for (std::size_t i = 0; i < size_; ++i) cin[i] = in[i];
    fft_c(cin.data(), out, sign);
  }

  void fft_c(const std::complex<double>* in, std::complex<double>* out,
             int sign) const {
    if (info_.dims.empty()) { out[0] = in[0]; return; }
    std::vector<int> dims(info_.dims.begin(), info_.dims.end());
    std::vector<std::complex<double>> buf(in, in + size_);
    fftw_plan plan = fftw_plan_dft(int(dims.size()), dims.data(),
                                   reinterpret_cast<fftw_complex*>(buf.data()),
                                   reinterpret_cast<fftw_complex*>(out), sign,
                                   FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  DualGroupInfo info_;
  std::size_t size_ = 1;
  std::vector<std::complex<double>> muhat_;
};

// ---------------------------------------------------------------------------
// Distinguished prevector and centering.
// ---------------------------------------------------------------------------
struct DistinguishedPrevector {
  double centering = 0;               // C(xi) = arg(mu_hat)/2pi
  std::vector<std::int64_t> nu;       // Delta' xi' for the centered rep
  std::vector<double> xi_star;        // xi' - C, entries in (-1/2, 1/2]
};

inline DistinguishedPrevector distinguished_prevector(const FiniteSandpileGraph& g,
                                                      const DualCharacter& c) {
  if (c.den <= 0)
    throw std::invalid_argument("distinguished_prevector: exact character required");
  DistinguishedPrevector out;
  out.centering = std::arg(c.mu_hat) / (2.0 * M_PI);
  // Representative window (C - 1/2, C + 1/2]: xi' = xi - shift.
  std::vector<std::int64_t> shift(g.n);
  out.xi_star.resize(g.n);
  for (int v = 0; v < g.n; ++v) {
    double x = double(c.num[v]) / double(c.den);
    double s = std::ceil(x - out.centering - 0.5);
    // Guard the open endpoint: x - s must exceed C - 1/2.
    if (x - s <= out.centering - 0.5 + 1e-15) s -= 1.0;
    if (x - s > out.centering + 0.5 + 1e-12) s += 1.0;
    shift[v] = std::int64_t(s);
    out.xi_star[v] = x - s - out.centering;
  }
  // nu = Delta' (xi - shift), exact: Delta' xi has integer entries.
  out.nu.assign(g.n, 0);
  for (int v = 0; v < g.n; ++v) {
    __int128 accnum = (__int128)g.deg[v] * c.num[v];
    std::int64_t accshift = -g.deg[v] * shift[v];
    for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k) {
      auto [w, mult] = g.adj[k];
      if (w == g.sink()) continue;
      accnum -= (__int128)mult * c.num[w];
      accshift += mult * shift[w];
    }
    __int128 q = accnum / c.den;
    if (q * c.den != accnum)
      throw std::logic_error("distinguished_prevector: Delta' xi not integral");
    out.nu[v] = std::int64_t(q) - accshift;
  }
  return out;
}

// sav(xi; S) = |S| - |sum_{x in S} e(xi_x)|.
inline double savings_of(const std::vector<double>& xi_values) {
  std::complex<double> s = 0;
  for (double x : xi_values) s += unit_phase(x);
  return double(xi_values.size()) - std::abs(s);
}

// ---------------------------------------------------------------------------
// Certified total-variation lower bound: for X subset of nonzero
// characters, if  sum_X |mu_hat|^N >= |X|^{1/2} / eps1  and
// sum_{x1,x2 in X} |mu_hat(x1 - x2)|^N <= (1 + eps2^2)(sum_X |mu_hat|^N)^2
// with eps1, eps2 in (0,1), then TV >= 1 - 4 eps1^2 - 4 eps2^2.
// ---------------------------------------------------------------------------
struct WitnessResult {
  double bound = 0;
  double eps1 = 0, eps2 = 0;
  bool satisfied = false;
};

inline WitnessResult tv_lower_witness(const std::vector<DualCharacter>& X,
                                      std::int64_t N) {
  WitnessResult w;
  if (X.empty()) return w;
  int n = int(X.front().xi.size());
  long double A = 0;
  for (const auto& c : X) A += std::pow(std::abs(c.mu_hat), double(N));
  long double B = 0;
  std::vector<double> diff(n);
  for (const auto& c1 : X)
    for (const auto& c2 : X) {
      for (int v = 0; v < n; ++v) diff[v] = c1.xi[v] - c2.xi[v];
      B += std::pow(std::abs(mu_hat_of(diff)), double(N));
    }
  w.eps1 = double(std::sqrt((long double)X.size()) / A);
  long double e22 = B / (A * A) - 1.0L;
  w.eps2 = e22 <= 0 ? 0 : double(std::sqrt(e22));
  if (w.eps1 <= 0 || w.eps1 >= 1 || w.eps2 >= 1) return w;  // not satisfiable
  w.satisfied = true;
  w.bound = std::clamp(1.0 - 4.0 * w.eps1 * w.eps1 - 4.0 * w.eps2 * w.eps2, 0.0, 1.0);
  return w;
}

// ---------------------------------------------------------------------------
// Spectral-gap scan: the gap of the kernel is min over nonzero characters
// of 1 - |mu_hat(xi)|, achieved at characters xi = (Delta')^{-1} nu with a
// small prevector nu.  We scan prevectors with support in an anchored
// graph ball and bounded l1 norm; |T_m| * gap should approach gamma.
// ---------------------------------------------------------------------------
struct GapScanRow {
  int m = 0;
  std::int64_t vertices = 0;  // |T_m| including the sink
  double gap = 0;
  double scaled = 0;          // |T_m| * gap
};

inline double min_one_minus_muhat(const FiniteSandpileGraph& g, int R0 = 2,
                                  std::int64_t B = 4) {
  using Mat = Eigen::MatrixXd;
  Mat L = Mat::Zero(g.n, g.n);
  for (int v = 0; v < g.n; ++v) {
    L(v, v) = double(g.deg[v]);
    for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k) {
      auto [w, mult] = g.adj[k];
      if (w != g.sink()) L(v, w) -= double(mult);
    }
  }
  Eigen::PartialPivLU<Mat> lu(L);

  // Graph balls around each anchor (adjacency without the sink collapses
  // nothing: balls may wrap on small tori, which only merges candidates).
  auto ball_of = [&](int a) {
    std::vector<int> order{a};
    std::vector<int> dist(g.n, -1);
    dist[a] = 0;
    std::size_t head = 0;
    while (head < order.size()) {
      int v = order[head++];
      if (dist[v] == R0) continue;
      for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k) {
        int w = g.adj[k].first;
        if (w == g.sink() || dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        order.push_back(w);
      }
    }
    return order;
  };

  double best = 2.0;
  Eigen::VectorXd rhs(g.n), xi(g.n);
  int smax = int(std::min<std::int64_t>(B, 4));
  for (int a = 0; a < g.n; ++a) {
    std::vector<int> ball = ball_of(a);
    int nb = int(ball.size());
    for (int s = 1; s <= std::min(smax, nb); ++s) {
      auto patterns = detail::value_patterns(s, B);
      std::vector<int> supp(s);
      std::function<void(int, int)> rec = [&](int k, int lo) {
        if (k == s) {
          // Anchored supports: require the anchor present to avoid
          // re-enumerating across anchors.
          if (std::find(supp.begin(), supp.end(), 0) == supp.end()) return;
          for (const auto& pat : patterns) {
            rhs.setZero();
            for (int t = 0; t < s; ++t) rhs[ball[supp[t]]] = double(pat[t]);
            xi = lu.solve(rhs);
            std::complex<double> acc = 1.0;
            for (int v = 0; v < g.n; ++v) acc += unit_phase(xi[v]);
            double one_minus = 1.0 - std::abs(acc) / double(g.n + 1);
            if (one_minus > 1e-12 && one_minus < best) best = one_minus;
          }
          return;
        }
        for (int i = lo; i < nb; ++i) { supp[k] = i; rec(k + 1, i + 1); }
      };
      rec(0, 0);
    }
  }
  return best;
}

inline std::vector<GapScanRow> gap_scan(const TilingSpec& spec,
                                        const std::vector<int>& ms, int R0 = 2,
                                        std::int64_t B = 4) {
  std::vector<GapScanRow> rows;
  for (int m : ms) {
    FiniteSandpileGraph g = build_torus(spec, m);
    GapScanRow r;
    r.m = m;
    r.vertices = g.n + 1;
    r.gap = min_one_minus_muhat(g, R0, B);
    r.scaled = double(r.vertices) * r.gap;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Monte Carlo mixing with the translate-family statistic.
//
// Base observable: xi = g_{T_m} * nu for the spectral-gap minimizer nu;
// the family consists of all torus translates, gauged to vanish at the
// sink.  The chain statistic delta_N^2 = sum_t |avg_c e(xi_t . sigma)|^2
// - M/chains decays like M e^{-2 N gap}; the reported "TV proxy"
// 2 Phi(delta/2) - 1 squashes it to [0, 1).
// ---------------------------------------------------------------------------
struct McOptions {
  int chains = 48;
  std::int64_t N_max = 0;      // 0: 3x the prediction
  int records = 48;
  std::uint64_t seed = 1;
  double t_pred = -1;          // (Gamma/2) |T| log m, if known
};

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Unnormalized d-dimensional complex DFT on an m^d grid (single cell).
inline void dft_grid(std::vector<std::complex<double>>& a, int m, int d, int sign) {
  std::vector<int> dims(d, m);
  fftw_plan plan = fftw_plan_dft(d, dims.data(),
                                 reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(a.data()), sign,
                                 FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

}  // namespace detail

// Internal: per-record translate statistic on a torus-with-sink graph or
// an open graph via odd reflection onto the doubled torus.
class TranslateStatistic {
 public:
  // Torus boundary: field xi on T_m, translate by all m^d vectors.
  // Open boundary (axis-aligned unit-cube region): field xi^A on T_{2m},
  // odd-extended; translates likewise.
  TranslateStatistic(const TilingSpec& spec, const FiniteSandpileGraph& g,
                     const Prevector& nu) : g_(&g) {
    if (spec.num_cells() != 1)
      throw std::invalid_argument("TranslateStatistic: single-cell specs only");
    d_ = spec.dim;
    m_ = g.torus ? g.m : 2 * g.m;
    TorusField f = greens_torus(spec, m_, nu.as_site_values());
    xi_hat_.assign(f.data[0].begin(), f.data[0].end());
    N_ = xi_hat_.size();
    xi_ = xi_hat_;  // keep real-space copy for the gauge term
    detail::dft_grid(xi_hat_, m_, d_, FFTW_FORWARD);
    // Embedding of graph vertices into the m_^d grid.
    embed_.resize(g.n);
    for (int v = 0; v < g.n; ++v) embed_[v] = fold_index(g.site_of[v].lam, m_);
    valid_.assign(N_, 1);
    if (!g.torus) {
      // The open-boundary character for translate t is the odd extension
      // of the translated prevector: xi^(t) = sum_flips sign * xi0(flip .
      // x - t).  Keep only translates whose prevector support stays in the
      // strict interior [1, m-1]^d, so the antisymmetrization never
      // cancels the prevector itself.
      for (std::size_t t = 0; t < N_; ++t) {
        auto lam = unfold_index(t, m_, d_);
        for (const auto& [site, v] : nu.entries)
          for (int i = 0; i < d_; ++i) {
            int c = ((lam[i] + site.lam[i]) % m_ + m_) % m_;
            if (c < 1 || c > g.m - 1) { valid_[t] = 0; }
          }
      }
    }
  }

  std::size_t grid_size() const { return N_; }

  std::size_t family_size() const {
    std::size_t c = 0;
    for (char v : valid_) c += v;
    return c;
  }

  // z_t = e(sum_v (xi(v - t) - xi(s - t)) sigma_v) for every translate t;
  // for open graphs xi vanishes on the reflecting hyperplanes through the
  // sink sites, so the gauge term drops there.
  void accumulate(const Configuration& sigma,
                  std::vector<std::complex<double>>& acc) const {
    std::vector<std::complex<double>> spec_sum(N_, 0.0);
    std::vector<std::complex<double>> buf(N_);
    double total = 0;
    int nflips = g_->torus ? 1 : (1 << d_);
    for (int mask = 0; mask < nflips; ++mask) {
      std::fill(buf.begin(), buf.end(), std::complex<double>(0.0));
      for (int v = 0; v < g_->n; ++v) {
        std::size_t idx = embed_[v];
        if (mask) {
          auto lam = unfold_index(idx, m_, d_);
          for (int i = 0; i < d_; ++i)
            if (mask & (1 << i)) lam[i] = -lam[i];
          idx = fold_index(lam, m_);
        }
        buf[idx] += double(sigma[v]);
        if (mask == 0) total += double(sigma[v]);
      }
      detail::dft_grid(buf, m_, d_, FFTW_FORWARD);
      double sgn = __builtin_popcount(unsigned(mask)) % 2 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < N_; ++i) spec_sum[i] += sgn * buf[i];
    }
    for (std::size_t i = 0; i < N_; ++i) spec_sum[i] *= std::conj(xi_hat_[i]);
    detail::dft_grid(spec_sum, m_, d_, FFTW_BACKWARD);
    bool torus = g_->torus;
    for (std::size_t t = 0; t < N_; ++t) {
      if (!valid_[t]) continue;
      double dot = spec_sum[t].real() / double(N_);
      if (torus) {
        // xi(sink - t) with the sink at the origin: index of -t.
        auto lam = unfold_index(t, m_, d_);
        for (int i = 0; i < d_; ++i) lam[i] = -lam[i];
        dot -= xi_[fold_index(lam, m_)].real() * total;
      }
      acc[t] += unit_phase(dot);
    }
  }

  bool valid(std::size_t t) const { return valid_[t] != 0; }

 private:
  const FiniteSandpileGraph* g_;
  int d_ = 0, m_ = 0;
  std::size_t N_ = 0;
  std::vector<std::complex<double>> xi_hat_;
  std::vector<std::complex<double>> xi_;
  std::vector<std::size_t> embed_;
  std::vector<char> valid_;
};

inline MixingProfile mc_mixing(const TilingSpec& spec, const FiniteSandpileGraph& g,
                               const Prevector& nu, const McOptions& opt) {
  TranslateStatistic stat(spec, g, nu);
  std::int64_t N_max = opt.N_max;
  if (N_max <= 0) N_max = opt.t_pred > 0 ? std::int64_t(3 * opt.t_pred) : 64 * g.n;
  std::vector<std::int64_t> record_at;
  for (int r = 0; r < opt.records; ++r)
    record_at.push_back(std::int64_t((double(r + 1) / opt.records) * double(N_max)));
  record_at.erase(std::unique(record_at.begin(), record_at.end()), record_at.end());
  std::size_t M = stat.family_size();
  std::vector<std::vector<std::complex<double>>> acc(
      record_at.size(), std::vector<std::complex<double>>(stat.grid_size(), 0.0));
  std::vector<std::complex<double>> base_acc(record_at.size(), 0.0);

  for (int c = 0; c < opt.chains; ++c) {
    CounterRng rng(opt.seed, std::uint64_t(c));
    Configuration sigma = sigma_full(g);
    std::int64_t n = 0;
    for (std::size_t r = 0; r < record_at.size(); ++r) {
      while (n < record_at[r]) { step(g, sigma, rng); ++n; }
      stat.accumulate(sigma, acc[r]);
    }
  }

  MixingProfile prof;
  prof.t_pred = opt.t_pred;
  for (std::size_t r = 0; r < record_at.size(); ++r) {
    MixingSample row;
    row.N = record_at[r];
    long double sum2 = 0;
    for (const auto& z : acc[r]) {
      std::complex<double> e = z / double(opt.chains);
      sum2 += std::norm(e);
    }
    double delta2 = double(sum2) - double(M) / double(opt.chains);
    double delta = delta2 > 0 ? std::sqrt(delta2) : 0.0;
    row.tv_lower = 2.0 * detail::normal_cdf(delta / 2.0) - 1.0;  // "TV proxy"
    std::complex<double> base = acc[r][0] / double(opt.chains);
    row.obs_re = base.real();
    row.obs_im = base.imag();
    row.stderr_ = 1.0 / std::sqrt(double(opt.chains));
    prof.samples.push_back(row);
  }
  prof.t_mix = detail::first_crossing(prof.samples, 1.0 / M_E, &MixingSample::tv_lower);
  double n75 = detail::first_crossing(prof.samples, 0.75, &MixingSample::tv_lower);
  double n25 = detail::first_crossing(prof.samples, 0.25, &MixingSample::tv_lower);
  if (n75 >= 0 && n25 >= 0) prof.width = n25 - n75;
  return prof;
}

struct CutoffRow {
  int m = 0;
  std::int64_t vertices = 0;
  double t_mix = -1, width = -1, t_pred = -1, ratio = -1;
};

// Cut-off scan: empirical t_mix and width across sizes, against the
// prediction t = (Gamma0 / 2) |graph| log m.
inline std::vector<CutoffRow> cutoff_scan(const TilingSpec& spec,
                                          const std::string& boundary,
                                          const std::vector<int>& ms,
                                          const Prevector& nu, double Gamma0,
                                          McOptions opt = {}) {
  std::vector<CutoffRow> rows;
  for (int m : ms) {
    FiniteSandpileGraph g =
        boundary == "torus" ? build_torus(spec, m) : build_open(spec, m);
    CutoffRow row;
    row.m = m;
    row.vertices = g.n + 1;
    row.t_pred = 0.5 * Gamma0 * double(row.vertices) * std::log(double(m));
    McOptions o = opt;
    o.t_pred = row.t_pred;
    MixingProfile prof = mc_mixing(spec, g, nu, o);
    row.t_mix = prof.t_mix;
    row.width = prof.width;
    if (row.t_mix > 0) row.ratio = row.width / row.t_mix;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tilepile
