// Green's function tests.  Independent oracles in this file:
//   * direct summation of the stopped-walk measure transform (vs rho_hat
//     and g_hat from the transfer-matrix route),
//   * a time-stepping Neumann-sum solver G = sum_t P^t eta / deg on the
//     torus (vs the Bloch/FFT solver),
//   * closed-form values: the square-lattice transform, g_hat at (1/2,1/2),
//     and the classical potential-kernel differences a(e)=1, a(1,1)=4/pi.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tilepile/greens.hpp"

using namespace tilepile;

namespace {

Site origin(const TilingSpec& spec, int cell = 0) {
  return Site{cell, std::vector<int>(spec.dim, 0)};
}

Complex rho_hat_direct(const TilingSpec& spec, const std::vector<double>& x) {
  auto rho = first_return_measure(spec);
  Complex acc(0, 0);
  for (const auto& [lam, p] : rho.mass) {
    double phase = 0;
    for (int i = 0; i < spec.dim; ++i) phase += x[i] * lam[i];
    acc += p * std::exp(Complex(0, -2.0 * M_PI * phase));
  }
  return acc;
}

}  // namespace

TEST_CASE("square stopped measure is uniform on the four neighbours") {
  TilingSpec sq = builtin_square();
  auto rho = first_return_measure(sq);
  CHECK(rho.mass.size() == 4);
  for (const auto& [lam, p] : rho.mass) {
    CHECK(std::abs(lam[0]) + std::abs(lam[1]) == 1);
    CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK(rho.residual <= 1e-14);
}

TEST_CASE("hexagonal stopped measure from cell 1") {
  TilingSpec hex = builtin_hexagonal();
  auto nu = stopped_measure(hex, origin(hex, 1));
  // One step from the off-lattice cell lands on the lattice: 3 atoms of 1/3.
  CHECK(nu.mass.size() == 3);
  double tot = 0;
  for (const auto& [lam, p] : nu.mass) {
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    tot += p;
  }
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
  // Mean equals the cell moment vector x_1.
  auto xc = cell_moment_vectors(hex);
  auto mu = nu.mean(hex.dim);
  for (int i = 0; i < hex.dim; ++i)
    CHECK(mu[i] == doctest::Approx(xc[1][i]).epsilon(1e-10));
}

TEST_CASE("first-return measures are symmetric with zero mean and full mass") {
  for (const char* name : {"square", "triangular", "hexagonal", "tetrakis", "fcc"}) {
    TilingSpec spec = builtin_spec(name);
    auto rho = first_return_measure(spec);
    double tot = 0;
    for (const auto& [lam, p] : rho.mass) {
      tot += p;
      std::vector<int> neg(spec.dim);
      for (int i = 0; i < spec.dim; ++i) neg[i] = -lam[i];
      auto it = rho.mass.find(neg);
      REQUIRE(it != rho.mass.end());
      CHECK(it->second == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-10));
    for (double m : rho.mean(spec.dim)) CHECK(std::abs(m) < 1e-10);
  }
}

TEST_CASE("single-cell stopped measure mean equals the start point") {
  TilingSpec tri = builtin_triangular();
  for (auto start : {std::vector<int>{2, -1}, {0, 3}, {-2, -2}, {5, 1}, {1, 0}}) {
    auto nu = stopped_measure(tri, Site{0, start});
    auto mu = nu.mean(2);
    for (int i = 0; i < 2; ++i)
      CHECK(mu[i] == doctest::Approx(double(start[i])).epsilon(1e-9));
  }
}

TEST_CASE("rho_hat closed form on the square lattice") {
  TilingSpec sq = builtin_square();
  CounterRng rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    double x1 = rng.next_double() - 0.5, x2 = rng.next_double() - 0.5;
    Complex got = rho_hat(sq, {x1, x2});
    double want = 0.5 * (std::cos(2 * M_PI * x1) + std::cos(2 * M_PI * x2));
    CHECK(got.real() == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(got.imag()) < 1e-12);
  }
}

TEST_CASE("rho_hat(0) = 1 for every builtin tiling") {
  for (const auto& name : builtin_names()) {
    TilingSpec spec = builtin_spec(name);
    Complex v = rho_hat(spec, std::vector<double>(spec.dim, 0.0));
    CHECK(std::abs(v - Complex(1, 0)) < 1e-10);
  }
}

TEST_CASE("transfer-matrix rho_hat matches direct summation (multi-cell)") {
  for (const char* name : {"hexagonal", "tetrakis"}) {
    TilingSpec spec = builtin_spec(name);
    CounterRng rng(32, fnv1a(name));
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<double> x(spec.dim);
      for (auto& c : x) c = rng.next_double() - 0.5;
      Complex a = rho_hat(spec, x);
      Complex b = rho_hat_direct(spec, x);
      CHECK(std::abs(a - b) < 1e-9);
    }
  }
}

TEST_CASE("g_hat closed form and direct route") {
  TilingSpec sq = builtin_square();
  // 1 - rho_hat(1/2,1/2) = 2, deg = 4 -> g_hat = 1/8.
  Complex v = g_hat(sq, {0.5, 0.5});
  CHECK(std::abs(v - Complex(0.125, 0)) < 1e-12);
  TilingSpec hex = builtin_hexagonal();
  CounterRng rng(33, 0);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> x{rng.next_double() * 0.8 + 0.1, rng.next_double() * 0.8 + 0.1};
    Complex a = g_hat(hex, x);
    Complex b = 1.0 / (double(hex.degree(0)) * (1.0 - rho_hat_direct(hex, x)));
    CHECK(std::abs(a - b) < 1e-9);
  }
  CHECK_THROWS_AS(g_hat(sq, {1.0, 1.0}), PoleAtZero);
  CHECK_THROWS_AS(g_hat(sq, {1e-12, 0.0}), PoleAtZero);
}

TEST_CASE("|rho_hat| <= 1 and positivity of 1 - rho_hat off the dual lattice") {
  TilingSpec tri = builtin_triangular();
  TilingSpec sq = builtin_square();
  int m = 8;
  for (int k1 = 0; k1 < m; ++k1)
    for (int k2 = 0; k2 < m; ++k2) {
      std::vector<double> x{double(k1) / m, double(k2) / m};
      CHECK(std::abs(rho_hat(sq, x)) <= 1 + 1e-12);
      Complex r = rho_hat(tri, x);
      CHECK(std::abs(r) <= 1 + 1e-12);
      // Triangular is non-bipartite relative to its lattice: strict gap.
      if (k1 != 0 || k2 != 0) CHECK(1.0 - r.real() > 1e-3);
    }
}

TEST_CASE("small-x Taylor expansion of 1 - rho_hat") {
  for (const char* name : {"square", "triangular"}) {
    TilingSpec spec = builtin_spec(name);
    auto rho = first_return_measure(spec);
    double cov[2][2] = {{0, 0}, {0, 0}};
    for (const auto& [lam, p] : rho.mass)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) cov[i][j] += p * lam[i] * lam[j];
    CounterRng rng(34, fnv1a(name));
    for (int trial = 0; trial < 10; ++trial) {
      double sc = 0.01;
      std::vector<double> x{sc * (rng.next_double() - 0.5), sc * (rng.next_double() - 0.5)};
      double quad = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) quad += x[i] * cov[i][j] * x[j];
      double lhs = 1.0 - rho_hat(spec, x).real();
      CHECK(lhs == doctest::Approx(2 * M_PI * M_PI * quad).epsilon(0.01));
    }
  }
}

TEST_CASE("greens_torus solves the Laplace equation exactly") {
  struct Case { const char* name; int m; };
  for (auto [name, m] : {Case{"square", 8}, {"triangular", 5}, {"hexagonal", 6},
                         {"fcc", 4}, {"d4", 3}}) {
    TilingSpec spec = builtin_spec(name);
    CounterRng rng(35, fnv1a(name));
    for (int trial = 0; trial < 3; ++trial) {
      // Random mean-zero integer eta.
      std::vector<SiteValue> eta;
      for (int a = 0; a < 3; ++a) {
        Site s{int(rng.next_below(std::uint64_t(spec.num_cells()))),
               std::vector<int>(spec.dim)};
        for (auto& c : s.lam) c = int(rng.next_below(std::uint64_t(m)));
        int v = 1 + int(rng.next_below(3));
        eta.push_back({s, double(v)});
        Site t = s;
        t.lam[0] = (t.lam[0] + 1 + int(rng.next_below(std::uint64_t(m - 1)))) % m;
        eta.push_back({t, double(-v)});
      }
      TorusField g = greens_torus(spec, m, eta);
      TorusField back = apply_laplacian(g);
      std::unordered_map<Site, double, SiteHash> want;
      for (const auto& sv : eta) want[sv.site] += sv.value;
      std::size_t N = g.points_per_cell();
      std::vector<int> lam(spec.dim, 0);
      for (std::size_t idx = 0; idx < N; ++idx) {
        for (int c = 0; c < spec.num_cells(); ++c) {
          auto it = want.find(Site{c, lam});
          double expect = it == want.end() ? 0.0 : it->second;
          CHECK(std::abs(back.data[c][idx] - expect) < 1e-9);
        }
        int i = spec.dim - 1;
        while (i >= 0 && lam[i] == m - 1) { lam[i] = 0; --i; }
        if (i >= 0) ++lam[i];
      }
      CHECK(std::abs(g.total()) < 1e-9);
    }
  }
}

TEST_CASE("greens_torus of Delta delta_0 is delta_0 minus its mean") {
  TilingSpec sq = builtin_square();
  int m = 6;
  std::vector<SiteValue> eta{{origin(sq), 4.0},
                             {Site{0, {1, 0}}, -1.0},
                             {Site{0, {m - 1, 0}}, -1.0},
                             {Site{0, {0, 1}}, -1.0},
                             {Site{0, {0, m - 1}}, -1.0}};
  TorusField g = greens_torus(sq, m, eta);
  double c = 1.0 / double(m * m);
  std::size_t N = g.points_per_cell();
  for (std::size_t idx = 0; idx < N; ++idx) {
    double want = (idx == 0 ? 1.0 : 0.0) - c;
    CHECK(std::abs(g.data[0][idx] - want) < 1e-10);
  }
}

TEST_CASE("greens_torus rejects inputs with nonzero mass") {
  TilingSpec sq = builtin_square();
  CHECK_THROWS_AS(greens_torus(sq, 4, {{origin(sq), 1.0}}), MeanNotZero);
}

TEST_CASE("time-stepping Neumann sum reproduces greens_torus") {
  TilingSpec sq = builtin_square();
  int m = 32;
  std::size_t N = std::size_t(m) * m;
  auto fold = [&](int a, int b) {
    return std::size_t(((a % m) + m) % m) * m + std::size_t(((b % m) + m) % m);
  };
  // Lazy walk (I+P)/2 so the bipartite (-1)-eigenmode also decays; then
  // (I - P_lazy) = Delta/8 and G = acc/8.
  std::vector<double> u(N, 0.0), acc(N, 0.0);
  u[fold(0, 0)] = 1.0;
  u[fold(1, 0)] -= 1.0;
  for (int t = 0; t < 6000; ++t) {
    for (std::size_t i = 0; i < N; ++i) acc[i] += u[i];
    std::vector<double> nxt(N, 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double q = 0.125 * u[fold(a, b)];
        nxt[fold(a, b)] += 4.0 * q;
        nxt[fold(a + 1, b)] += q;
        nxt[fold(a - 1, b)] += q;
        nxt[fold(a, b + 1)] += q;
        nxt[fold(a, b - 1)] += q;
      }
    u = std::move(nxt);
  }
  std::vector<SiteValue> eta{{origin(sq), 1.0}, {Site{0, {1, 0}}, -1.0}};
  TorusField g = greens_torus(sq, m, eta);
  for (std::size_t i = 0; i < N; ++i)
    CHECK(std::abs(acc[i] / 8.0 - g.data[0][i]) < 1e-6);
}

TEST_CASE("potential-kernel differences on the square lattice") {
  // Classical values: a(e) = 1 and a(1,1) = 4/pi, with g(0)-g(x) = a(x)/4.
  TilingSpec sq = builtin_square();
  int m = 128;
  TorusField g = greens_torus_point(sq, m);
  double g0 = g.at_site(origin(sq));
  double ge = g.at_site(Site{0, {1, 0}});
  double gd = g.at_site(Site{0, {1, 1}});
  CHECK(g0 - ge == doctest::Approx(0.25).epsilon(5e-4));
  CHECK(g0 - gd == doctest::Approx(1.0 / M_PI).epsilon(5e-4));
}

TEST_CASE("greens_infinite inverts the Laplacian of a point mass") {
  TilingSpec sq = builtin_square();
  // eta = Delta delta_0 is C2; its infinite-volume potential is delta_0.
  std::vector<SiteValue> eta{{origin(sq), 4.0},
                             {Site{0, {1, 0}}, -1.0},
                             {Site{0, {-1, 0}}, -1.0},
                             {Site{0, {0, 1}}, -1.0},
                             {Site{0, {0, -1}}, -1.0}};
  std::vector<Site> queries{origin(sq), Site{0, {1, 0}}, Site{0, {2, 1}}, Site{0, {5, -3}}};
  auto res = greens_infinite(sq, eta, queries, 32);
  REQUIRE(res.values.size() == 4);
  double tol = res.error_estimate + 1e-8;
  CHECK(std::abs(res.values[0] - 1.0) < tol);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(res.values[i]) < tol);
}

TEST_CASE("classification of finitely supported functions") {
  TilingSpec sq = builtin_square();
  TilingSpec hex = builtin_hexagonal();
  std::vector<SiteValue> dip{{origin(sq), 1.0}, {Site{0, {1, 0}}, -1.0}};
  CHECK(classify(sq, dip) == 1);
  std::vector<SiteValue> second{{origin(sq), 1.0},
                                {Site{0, {1, 0}}, -1.0},
                                {Site{0, {0, 1}}, -1.0},
                                {Site{0, {1, 1}}, 1.0}};
  CHECK(classify(sq, second) == 2);
  std::vector<SiteValue> lap{{origin(sq), 4.0},
                             {Site{0, {1, 0}}, -1.0},
                             {Site{0, {-1, 0}}, -1.0},
                             {Site{0, {0, 1}}, -1.0},
                             {Site{0, {0, -1}}, -1.0}};
  CHECK(classify(sq, lap) == 2);
  std::vector<SiteValue> point{{origin(sq), 3.0}};
  CHECK(classify(sq, point) == 0);
  // Cross-cell dipole on the honeycomb: mean-zero but nonzero moment.
  std::vector<SiteValue> hexdip{{origin(hex, 0), 1.0}, {origin(hex, 1), -1.0}};
  CHECK(classify(hex, hexdip) == 1);
  CHECK_THROWS_AS(classify(sq, {{origin(sq), 0.5}}), std::invalid_argument);
  CHECK(rho_of_dim(2) == 2);
  CHECK(rho_of_dim(3) == 1);
  CHECK(rho_of_dim(4) == 1);
  CHECK(rho_of_dim(5) == 0);
}

TEST_CASE("discrete derivatives: annihilate constants and commute") {
  TilingSpec sq = builtin_square();
  int m = 6;
  TorusField c = make_field(sq, m);
  for (auto& v : c.data[0]) v = 3.5;
  TorusField dc = discrete_derivative(c, 0);
  for (double v : dc.data[0]) CHECK(v == doctest::Approx(0.0));
  TorusField f = make_field(sq, m);
  CounterRng rng(36, 0);
  for (auto& v : f.data[0]) v = rng.next_double();
  TorusField ab = discrete_derivative(discrete_derivative(f, 0), 1);
  TorusField ba = discrete_derivative(discrete_derivative(f, 1), 0);
  for (std::size_t i = 0; i < ab.data[0].size(); ++i)
    CHECK(ab.data[0][i] == doctest::Approx(ba.data[0][i]).epsilon(1e-12));
}

TEST_CASE("torus Green's field is translation equivariant") {
  TilingSpec hex = builtin_hexagonal();
  int m = 6;
  std::vector<SiteValue> eta{{origin(hex, 0), 2.0},
                             {Site{1, {2, 1}}, -1.0},
                             {Site{0, {4, 3}}, -1.0}};
  std::vector<int> t{2, 5};
  std::vector<SiteValue> shifted;
  for (auto sv : eta) {
    for (int i = 0; i < 2; ++i) sv.site.lam[i] = (sv.site.lam[i] + t[i]) % m;
    shifted.push_back(sv);
  }
  TorusField g0 = greens_torus(hex, m, eta);
  TorusField g1 = greens_torus(hex, m, shifted);
  std::vector<int> lam(2, 0);
  for (std::size_t idx = 0; idx < g0.points_per_cell(); ++idx) {
    std::vector<int> lam2{(lam[0] + t[0]) % m, (lam[1] + t[1]) % m};
    for (int c = 0; c < 2; ++c)
      CHECK(g0.at_site(Site{c, lam}) ==
            doctest::Approx(g1.at_site(Site{c, lam2})).epsilon(1e-10));
    int i = 1;
    while (i >= 0 && lam[i] == m - 1) { lam[i] = 0; --i; }
    if (i >= 0) ++lam[i];
  }
}

TEST_CASE("local limit theorem check passes on the square lattice") {
  auto rep = local_limit_check(builtin_square(), 256);
  REQUIRE(rep.ns.size() >= 2);
  CHECK(rep.pass);
  for (double e : rep.scaled_errors) CHECK(e < 1.0);
}
