// Periodic tilings, reflection families, and the finite sandpile graphs
// (torus / open boundary) built from them.
//
// A tiling is described in lattice coordinates: the translation lattice is
// identified with Z^d, each cell of the fundamental domain sits at a
// rational position in [0,1)^d, and every edge is (cell i) -> (cell j,
// integer offset).  The physical basis matrix is carried as metadata only;
// all geometric predicates (condition A, regions, reflections) are exact
// because in lattice coordinates they are integer/rational tests.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace tilepile {

// A vertex of the infinite tiling: (cell index, lattice coordinates).
struct Site {
  int cell = 0;
  std::vector<int> lam;

  bool operator==(const Site& o) const { return cell == o.cell && lam == o.lam; }
  bool operator<(const Site& o) const {
    if (lam != o.lam) return lam < o.lam;
    return cell < o.cell;
  }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    std::uint64_t h = CounterRng::mix(0x5151ULL + std::uint64_t(s.cell));
    for (int c : s.lam) h = CounterRng::mix(h ^ (std::uint64_t(std::uint32_t(c)) + 0x9e37ULL));
    return std::size_t(h);
  }
};

// One family of parallel reflecting hyperplanes {value = k : k integer}.
//
// value(cell, lam) = cell_offset[cell] + a . lam, with integer coefficients
// a (so translating a vertex shifts the value by an integer and the family
// is translation-equivariant).  `apply` is the vertex involution for the
// reflection through {value = 0}:  (c, lam) -> (rcell[c], M lam + t[c]).
struct HyperplaneFamily {
  std::vector<std::int64_t> a;        // dim integer coefficients
  std::vector<Rat> cell_offset;       // one rational per cell
  std::vector<int> rcell;             // cell involution
  std::vector<int> mat;               // dim x dim integer matrix, row-major
  std::vector<std::vector<int>> tvec; // per-cell integer translation

  Rat value(const std::vector<Rat>& cell_pos_unused, int cell,
            const std::vector<int>& lam) const {
    (void)cell_pos_unused;
    Rat v = cell_offset[cell];
    for (std::size_t i = 0; i < a.size(); ++i) v = v + Rat(a[i] * lam[i]);
    return v;
  }

  Site apply(const Site& s) const {
    int d = int(a.size());
    Site r;
    r.cell = rcell[s.cell];
    r.lam.assign(d, 0);
    for (int i = 0; i < d; ++i) {
      long long acc = tvec[s.cell][i];
      for (int j = 0; j < d; ++j) acc += (long long)mat[i * d + j] * s.lam[j];
      r.lam[i] = int(acc);
    }
    return r;
  }
};

// Half-open constraint lo < value_family < hi defining the fundamental
// region R; build_open scales both bounds by m.
struct RegionConstraint {
  int family = 0;
  std::optional<Rat> lo;
  std::optional<Rat> hi;
};

struct ReflectionFamily {
  std::vector<HyperplaneFamily> planes;
  std::vector<RegionConstraint> region;
  // True when all families are equivalent under a symmetry of the tiling,
  // so gamma_j may evaluate a single representative subset per size.
  bool symmetric_families = false;
};

struct TilingEdge {
  int from = 0, to = 0;
  std::vector<int> offset;
  std::int64_t mult = 1;
};

struct TilingSpec {
  std::string name;
  int dim = 0;
  std::vector<double> basis;      // dim x dim row-major, metadata
  std::vector<std::vector<Rat>> cells;  // positions in [0,1)^d, lattice coords
  std::vector<TilingEdge> edges;
  std::optional<ReflectionFamily> reflections;

  int num_cells() const { return int(cells.size()); }

  std::int64_t degree(int cell) const {
    std::int64_t d = 0;
    for (const auto& e : edges)
      if (e.from == cell) d += e.mult;
    return d;
  }

  std::vector<std::int64_t> degrees() const {
    std::vector<std::int64_t> d(cells.size(), 0);
    for (const auto& e : edges) d[e.from] += e.mult;
    return d;
  }

  // Neighbours of a site on the infinite tiling.
  void neighbours(const Site& s, std::vector<std::pair<Site, std::int64_t>>& out) const {
    out.clear();
    for (const auto& e : edges) {
      if (e.from != s.cell) continue;
      Site t;
      t.cell = e.to;
      t.lam = s.lam;
      for (int i = 0; i < dim; ++i) t.lam[i] += e.offset[i];
      out.emplace_back(std::move(t), e.mult);
    }
  }

  void validate() const;
};

inline constexpr std::int64_t kMaxMultiplicity = std::int64_t(1) << 16;

inline void TilingSpec::validate() const {
  if (dim < 1 || dim > 8) throw std::invalid_argument("spec: dim must be in [1,8]");
  if (cells.empty()) throw std::invalid_argument("spec: needs at least one cell");
  if (basis.size() != std::size_t(dim) * dim)
    throw std::invalid_argument("spec: basis must be dim x dim");
  for (const auto& c : cells) {
    if (c.size() != std::size_t(dim)) throw std::invalid_argument("spec: cell dim mismatch");
    for (const auto& q : c)
      if (q < Rat(0) || q >= Rat(1))
        throw std::invalid_argument("spec: cell positions must lie in [0,1)^d");
  }
  for (const auto& q : cells[0])
    if (q != Rat(0)) throw std::invalid_argument("spec: cell 0 must sit at the origin");
  // Edges: valid endpoints, multiplicity cap, no self-loops on the infinite
  // tiling, closed under reversal.
  std::map<std::tuple<int, int, std::vector<int>>, std::int64_t> bag;
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= num_cells() || e.to < 0 || e.to >= num_cells())
      throw std::invalid_argument("spec: edge endpoint out of range");
    if (e.offset.size() != std::size_t(dim))
      throw std::invalid_argument("spec: edge offset dim mismatch");
    if (e.mult < 1 || e.mult > kMaxMultiplicity)
      throw std::invalid_argument("spec: edge multiplicity out of range");
    bool zero = std::all_of(e.offset.begin(), e.offset.end(), [](int v) { return v == 0; });
    if (zero && e.from == e.to)
      throw std::invalid_argument("spec: self-loop edge");
    bag[{e.from, e.to, e.offset}] += e.mult;
  }
  for (const auto& [key, m] : bag) {
    auto [i, j, o] = key;
    std::vector<int> ro(o.size());
    for (std::size_t k = 0; k < o.size(); ++k) ro[k] = -o[k];
    auto it = bag.find({j, i, ro});
    if (it == bag.end() || it->second != m)
      throw std::invalid_argument("spec: edge set not closed under reversal");
  }
  // Connectivity of the quotient multigraph (cells must form one component).
  std::vector<int> comp(cells.size(), -1);
  std::vector<int> stack{0};
  comp[0] = 0;
  while (!stack.empty()) {
    int c = stack.back(); stack.pop_back();
    for (const auto& e : edges)
      if (e.from == c && comp[e.to] < 0) { comp[e.to] = 0; stack.push_back(e.to); }
  }
  for (int c : comp)
    if (c < 0) throw std::invalid_argument("spec: quotient graph is disconnected");
  if (reflections) {
    for (const auto& h : reflections->planes) {
      if (h.a.size() != std::size_t(dim) ||
          h.cell_offset.size() != cells.size() ||
          h.rcell.size() != cells.size() ||
          h.mat.size() != std::size_t(dim) * dim ||
          h.tvec.size() != cells.size())
        throw std::invalid_argument("spec: malformed hyperplane family");
    }
    for (const auto& rc : reflections->region)
      if (rc.family < 0 || rc.family >= int(reflections->planes.size()))
        throw std::invalid_argument("spec: region references unknown family");
  }
}

// ---------------------------------------------------------------------------
// Condition A: no edge of the tiling crosses a reflecting hyperplane
// transversally (touching endpoints and edges lying inside a plane are
// fine).  Exact integer/rational test.
// ---------------------------------------------------------------------------
inline std::int64_t floor_rat(const Rat& q) {
  std::int64_t f = q.num / q.den;
  if (q.num % q.den != 0 && q.num < 0) --f;
  return f;
}

inline bool check_condition_A(const TilingSpec& spec) {
  if (!spec.reflections) return true;
  for (const auto& h : spec.reflections->planes) {
    for (const auto& e : spec.edges) {
      Rat q1 = h.cell_offset[e.from];
      Rat q2 = h.cell_offset[e.to];
      for (int i = 0; i < spec.dim; ++i) q2 = q2 + Rat(h.a[i] * e.offset[i]);
      if (q1 == q2) continue;               // parallel to the family
      Rat lo = std::min(q1, q2), hi = std::max(q1, q2);
      std::int64_t k = floor_rat(lo) + 1;   // smallest integer > lo
      if (lo.is_integer()) k = lo.num / lo.den + 1;
      if (Rat(k) < hi) return false;        // strict interior crossing
    }
  }
  return true;
}

// Checks that a hyperplane family's involution is a genuine automorphism
// fixing the plane {value = 0}: degree-preserving, edge-preserving on a
// patch, an involution, and value-negating.
inline bool check_reflection(const TilingSpec& spec, const HyperplaneFamily& h,
                             int patch_radius = 3) {
  std::unordered_map<Site, int, SiteHash> seen;
  std::vector<Site> frontier, ball;
  Site origin{0, std::vector<int>(spec.dim, 0)};
  frontier.push_back(origin);
  seen[origin] = 0;
  ball.push_back(origin);
  std::vector<std::pair<Site, std::int64_t>> nbrs;
  for (int r = 0; r < patch_radius; ++r) {
    std::vector<Site> next;
    for (const auto& s : frontier) {
      spec.neighbours(s, nbrs);
      for (auto& [t, mult] : nbrs) {
        if (!seen.count(t)) { seen[t] = r + 1; ball.push_back(t); next.push_back(t); }
      }
    }
    frontier = std::move(next);
  }
  auto degs = spec.degrees();
  for (const auto& s : ball) {
    Site rs = h.apply(s);
    if (!(h.apply(rs) == s)) return false;
    Rat v = h.value(spec.cells[s.cell], s.cell, s.lam);
    Rat rv = h.value(spec.cells[rs.cell], rs.cell, rs.lam);
    if (rv != -v) return false;
    if (degs[s.cell] != degs[rs.cell]) return false;
    // Edge preservation with multiplicities.
    spec.neighbours(s, nbrs);
    std::map<Site, std::int64_t> a, b;
    for (auto& [t, mult] : nbrs) a[h.apply(t)] += mult;
    spec.neighbours(rs, nbrs);
    for (auto& [t, mult] : nbrs) b[t] += mult;
    if (a != b) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Finite sandpile graphs.  Vertices 0..n-1 are non-sink; index n is the
// sink.  CSR adjacency with merged multiplicities; deg[] includes edges
// into the sink.
// ---------------------------------------------------------------------------
struct FiniteSandpileGraph {
  int n = 0;
  std::vector<std::size_t> row_ptr;                 // size n+1
  std::vector<std::pair<int, std::int64_t>> adj;    // (target, multiplicity)
  std::vector<std::int64_t> deg;                    // size n
  // Metadata for torus graphs (empty for generic graphs).
  const TilingSpec* spec = nullptr;
  int m = 0;
  bool torus = false;
  std::vector<Site> site_of;                        // vertex -> site, when known

  int sink() const { return n; }

  std::int64_t sink_degree() const {
    std::int64_t d = 0;
    for (std::size_t k = 0; k < adj.size(); ++k)
      if (adj[k].first == n) d += adj[k].second;
    return d;
  }

  static FiniteSandpileGraph from_edge_lists(
      int n, const std::vector<std::map<int, std::int64_t>>& rows) {
    FiniteSandpileGraph g;
    g.n = n;
    g.row_ptr.assign(n + 1, 0);
    g.deg.assign(n, 0);
    for (int v = 0; v < n; ++v) {
      g.row_ptr[v] = g.adj.size();
      for (const auto& [t, mult] : rows[v]) {
        g.adj.emplace_back(t, mult);
        g.deg[v] += mult;
      }
    }
    g.row_ptr[n] = g.adj.size();
    return g;
  }
};

// Torus T_m = tiling / m Lambda, sink at (cell 0, coords 0).
//
// Rejects m for which some edge becomes a self-loop after reduction mod m
// (offsets colliding back onto their source).
inline FiniteSandpileGraph build_torus(const TilingSpec& spec, int m) {
  spec.validate();
  if (m < 1) throw std::invalid_argument("build_torus: m must be positive");
  for (const auto& e : spec.edges) {
    if (e.from != e.to) continue;
    bool zero_mod_m = true;
    for (int o : e.offset)
      if (((o % m) + m) % m != 0) zero_mod_m = false;
    if (zero_mod_m)
      throw std::invalid_argument("build_torus: m=" + std::to_string(m) +
                                  " collapses an edge offset into a self-loop");
  }
  std::size_t md = ipow(std::size_t(m), spec.dim);
  std::size_t total = md * std::size_t(spec.num_cells());
  if (total > (std::size_t(1) << 26))
    throw std::invalid_argument("build_torus: graph too large to materialize");
  // Vertex ids: full index = cell * m^d + folded lattice coords; the sink
  // (cell 0, coords 0) is remapped to id n.
  auto full_of = [&](int cell, const std::vector<int>& lam) {
    return std::size_t(cell) * md + fold_index(lam, m);
  };
  std::size_t sink_full = 0;  // cell 0, coords 0
  int n = int(total) - 1;
  auto vid = [&](std::size_t full) -> int {
    if (full == sink_full) return n;
    return int(full) - (full > sink_full ? 1 : 0);
  };

  std::vector<std::map<int, std::int64_t>> rows(n);
  std::vector<Site> site_of(n);
  std::vector<int> lam(spec.dim);
  for (int cell = 0; cell < spec.num_cells(); ++cell) {
    for (std::size_t li = 0; li < md; ++li) {
      std::size_t full = std::size_t(cell) * md + li;
      if (full == sink_full) continue;
      int v = vid(full);
      Site s{cell, unfold_index(li, m, spec.dim)};
      site_of[v] = s;
      for (const auto& e : spec.edges) {
        if (e.from != cell) continue;
        lam = s.lam;
        for (int i = 0; i < spec.dim; ++i) lam[i] += e.offset[i];
        rows[v][vid(full_of(e.to, lam))] += e.mult;
      }
    }
  }
  auto g = FiniteSandpileGraph::from_edge_lists(n, rows);
  g.spec = &spec;
  g.m = m;
  g.torus = true;
  g.site_of = std::move(site_of);
  return g;
}

// Open-boundary graph: vertices of the tiling strictly inside m.R (the
// spec's region scaled by m), with everything outside merged into a single
// sink.  Requires a reflection family with a region.
inline FiniteSandpileGraph build_open(const TilingSpec& spec, int m) {
  spec.validate();
  if (!spec.reflections || spec.reflections->region.empty())
    throw std::invalid_argument("build_open: spec has no region description");
  const auto& rf = *spec.reflections;
  auto inside = [&](int cell, const std::vector<int>& lam) {
    for (const auto& rc : rf.region) {
      Rat v = rf.planes[rc.family].value(spec.cells[cell], cell, lam);
      if (rc.lo && !(Rat(std::int64_t(m)) * (*rc.lo) < v)) return false;
      if (rc.hi && !(v < Rat(std::int64_t(m)) * (*rc.hi))) return false;
    }
    return true;
  };
  // Conservative bounding box in lattice coordinates.
  int B = 3 * m + 3;
  std::size_t side = std::size_t(2 * B + 1);
  std::size_t box = 1;
  for (int i = 0; i < spec.dim; ++i) {
    box *= side;
    if (box > (std::size_t(1) << 27))
      throw std::invalid_argument("build_open: region scan too large");
  }
  std::unordered_map<Site, int, SiteHash> id;
  std::vector<Site> verts;
  std::vector<int> lam(spec.dim, -B);
  for (;;) {
    for (int cell = 0; cell < spec.num_cells(); ++cell) {
      if (inside(cell, lam)) {
        Site s{cell, lam};
        id.emplace(s, int(verts.size()));
        verts.push_back(s);
      }
    }
    int i = spec.dim - 1;
    while (i >= 0 && lam[i] == B) { lam[i] = -B; --i; }
    if (i < 0) break;
    ++lam[i];
  }
  int n = int(verts.size());
  if (n == 0) throw std::invalid_argument("build_open: empty interior (m too small)");
  std::vector<std::map<int, std::int64_t>> rows(n);
  std::vector<std::pair<Site, std::int64_t>> nbrs;
  for (int v = 0; v < n; ++v) {
    spec.neighbours(verts[v], nbrs);
    for (auto& [t, mult] : nbrs) {
      auto it = id.find(t);
      rows[v][it == id.end() ? n : it->second] += mult;
    }
  }
  auto g = FiniteSandpileGraph::from_edge_lists(n, rows);
  g.spec = &spec;
  g.m = m;
  g.torus = false;
  g.site_of = std::move(verts);
  return g;
}

// The quotient chain of the tiling: states = cells, transitions carry the
// lattice displacement of the step.  Row-stochastic by construction.
struct QuotientGraph {
  int num_cells = 0;
  std::vector<std::int64_t> deg;
  struct Transition { int from, to; std::vector<int> displacement; std::int64_t mult; };
  std::vector<Transition> transitions;
};

inline QuotientGraph quotient_graph(const TilingSpec& spec) {
  QuotientGraph q;
  q.num_cells = spec.num_cells();
  q.deg = spec.degrees();
  for (const auto& e : spec.edges)
    q.transitions.push_back({e.from, e.to, e.offset, e.mult});
  return q;
}

// ---------------------------------------------------------------------------
// JSON spec files.
// ---------------------------------------------------------------------------
inline nlohmann::json spec_to_json(const TilingSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["basis"] = spec.basis;
  auto cells = nlohmann::json::array();
  for (const auto& c : spec.cells) {
    auto pos = nlohmann::json::array();
    for (const auto& q : c) pos.push_back(q.str());
    cells.push_back(pos);
  }
  j["cells"] = cells;
  auto edges = nlohmann::json::array();
  for (const auto& e : spec.edges)
    edges.push_back({e.from, e.to, e.offset, e.mult});
  j["edges"] = edges;
  if (spec.reflections) {
    nlohmann::json r;
    auto planes = nlohmann::json::array();
    for (const auto& h : spec.reflections->planes) {
      nlohmann::json p;
      p["a"] = h.a;
      auto offs = nlohmann::json::array();
      for (const auto& q : h.cell_offset) offs.push_back(q.str());
      p["cell_offsets"] = offs;
      p["cell_map"] = h.rcell;
      p["matrix"] = h.mat;
      p["translations"] = h.tvec;
      planes.push_back(p);
    }
    r["planes"] = planes;
    auto region = nlohmann::json::array();
    for (const auto& rc : spec.reflections->region) {
      nlohmann::json c;
      c["family"] = rc.family;
      if (rc.lo) c["lo"] = rc.lo->str();
      if (rc.hi) c["hi"] = rc.hi->str();
      region.push_back(c);
    }
    r["region"] = region;
    r["symmetric_families"] = spec.reflections->symmetric_families;
    j["reflections"] = r;
  }
  return j;
}

inline Rat rat_from_json(const nlohmann::json& v) {
  if (v.is_string()) return parse_rat(v.get<std::string>());
  if (v.is_number_integer()) return Rat(v.get<std::int64_t>());
  // Float fallback: accept values within 1e-9 of a small rational.
  double x = v.get<double>();
  for (std::int64_t den = 1; den <= 1 << 20; den *= 2) {
    double scaled = x * double(den);
    double r = std::round(scaled);
    if (std::abs(scaled - r) < 1e-9 * double(den))
      return Rat(std::int64_t(r), den);
  }
  for (std::int64_t den = 3; den <= 9999; den += 2) {
    double scaled = x * double(den);
    double r = std::round(scaled);
    if (std::abs(scaled - r) < 1e-9 * double(den))
      return Rat(std::int64_t(r), den);
  }
  throw std::invalid_argument("spec: cannot rationalize coordinate " + std::to_string(x));
}

inline TilingSpec spec_from_json(const nlohmann::json& j) {
  TilingSpec spec;
  spec.name = j.value("name", "unnamed");
  spec.dim = j.at("dim").get<int>();
  spec.basis = j.at("basis").get<std::vector<double>>();
  for (const auto& c : j.at("cells")) {
    std::vector<Rat> pos;
    for (const auto& v : c) pos.push_back(rat_from_json(v));
    spec.cells.push_back(std::move(pos));
  }
  for (const auto& e : j.at("edges")) {
    TilingEdge edge;
    edge.from = e.at(0).get<int>();
    edge.to = e.at(1).get<int>();
    edge.offset = e.at(2).get<std::vector<int>>();
    edge.mult = e.size() > 3 ? e.at(3).get<std::int64_t>() : 1;
    spec.edges.push_back(std::move(edge));
  }
  if (j.contains("reflections")) {
    ReflectionFamily rf;
    const auto& r = j.at("reflections");
    for (const auto& p : r.at("planes")) {
      HyperplaneFamily h;
      h.a = p.at("a").get<std::vector<std::int64_t>>();
      for (const auto& v : p.at("cell_offsets")) h.cell_offset.push_back(rat_from_json(v));
      h.rcell = p.at("cell_map").get<std::vector<int>>();
      h.mat = p.at("matrix").get<std::vector<int>>();
      h.tvec = p.at("translations").get<std::vector<std::vector<int>>>();
      rf.planes.push_back(std::move(h));
    }
    if (r.contains("region")) {
      for (const auto& c : r.at("region")) {
        RegionConstraint rc;
        rc.family = c.at("family").get<int>();
        if (c.contains("lo")) rc.lo = rat_from_json(c.at("lo"));
        if (c.contains("hi")) rc.hi = rat_from_json(c.at("hi"));
        rf.region.push_back(std::move(rc));
      }
    }
    rf.symmetric_families = r.value("symmetric_families", false);
    spec.reflections = std::move(rf);
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Built-in tiling library.
// ---------------------------------------------------------------------------
namespace detail {

inline void add_edge_pair(TilingSpec& s, int i, int j, std::vector<int> o,
                          std::int64_t mult = 1) {
  std::vector<int> ro(o.size());
  for (std::size_t k = 0; k < o.size(); ++k) ro[k] = -o[k];
  s.edges.push_back({i, j, o, mult});
  s.edges.push_back({j, i, ro, mult});
}
inline void add_offsets_pm(TilingSpec& s, int i, int j,
                           const std::vector<std::vector<int>>& offs) {
  for (const auto& o : offs) add_edge_pair(s, i, j, o);
}

inline HyperplaneFamily coordinate_plane(int dim, int axis, int ncells) {
  HyperplaneFamily h;
  h.a.assign(dim, 0);
  h.a[axis] = 1;
  h.cell_offset.assign(ncells, Rat(0));
  h.rcell.resize(ncells);
  for (int c = 0; c < ncells; ++c) h.rcell[c] = c;
  h.mat.assign(dim * dim, 0);
  for (int i = 0; i < dim; ++i) h.mat[i * dim + i] = (i == axis) ? -1 : 1;
  h.tvec.assign(ncells, std::vector<int>(dim, 0));
  return h;
}

}  // namespace detail

inline TilingSpec builtin_zd(int d) {
  if (d < 1 || d > 8) throw std::invalid_argument("builtin zd: d in [1,8]");
  TilingSpec s;
  s.name = d == 2 ? "square" : ("z" + std::to_string(d));
  s.dim = d;
  s.basis.assign(d * d, 0.0);
  for (int i = 0; i < d; ++i) s.basis[i * d + i] = 1.0;
  s.cells = {std::vector<Rat>(d, Rat(0))};
  for (int i = 0; i < d; ++i) {
    std::vector<int> o(d, 0);
    o[i] = 1;
    detail::add_edge_pair(s, 0, 0, o);
  }
  ReflectionFamily rf;
  for (int i = 0; i < d; ++i) {
    rf.planes.push_back(detail::coordinate_plane(d, i, 1));
    rf.region.push_back({i, Rat(0), Rat(1)});
  }
  rf.symmetric_families = true;
  s.reflections = std::move(rf);
  return s;
}

inline TilingSpec builtin_square() { return builtin_zd(2); }

// Triangular lattice: basis v1=(1,0), v2=(1/2, sqrt3/2); six neighbours
// +-v1, +-v2, +-(v1 - v2).  Three reflection-line families (the lattice
// lines themselves): u2 = k, u1 = k, u1 + u2 = k.
inline TilingSpec builtin_triangular() {
  TilingSpec s;
  s.name = "triangular";
  s.dim = 2;
  s.basis = {1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0};
  s.cells = {{Rat(0), Rat(0)}};
  detail::add_offsets_pm(s, 0, 0, {{1, 0}, {0, 1}, {1, -1}});
  ReflectionFamily rf;
  {
    HyperplaneFamily h;  // horizontal lines u2=k; (u1,u2) -> (u1+u2, -u2)
    h.a = {0, 1};
    h.cell_offset = {Rat(0)};
    h.rcell = {0};
    h.mat = {1, 1, 0, -1};
    h.tvec = {{0, 0}};
    rf.planes.push_back(h);
  }
  {
    HyperplaneFamily h;  // lines along v2: u1=k; (u1,u2) -> (-u1, u1+u2)
    h.a = {1, 0};
    h.cell_offset = {Rat(0)};
    h.rcell = {0};
    h.mat = {-1, 0, 1, 1};
    h.tvec = {{0, 0}};
    rf.planes.push_back(h);
  }
  {
    HyperplaneFamily h;  // lines along v1-v2: u1+u2=k; (u1,u2) -> (-u2, -u1)
    h.a = {1, 1};
    h.cell_offset = {Rat(0)};
    h.rcell = {0};
    h.mat = {0, -1, -1, 0};
    h.tvec = {{0, 0}};
    rf.planes.push_back(h);
  }
  rf.region = {{0, Rat(0), std::nullopt},
               {1, Rat(0), std::nullopt},
               {2, std::nullopt, Rat(1)}};
  rf.symmetric_families = true;
  s.reflections = std::move(rf);
  return s;
}

// Honeycomb: cells A=(0,0), B=(1/3,1/3) on the triangular lattice;
// A's neighbours are B at offsets (0,0), (-1,0), (0,-1).
// Mirror-line families through vertices: u2-u1=k and 2*u1+u2=k.
inline TilingSpec builtin_hexagonal() {
  TilingSpec s;
  s.name = "hexagonal";
  s.dim = 2;
  s.basis = {1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0};
  s.cells = {{Rat(0), Rat(0)}, {Rat(1, 3), Rat(1, 3)}};
  detail::add_offsets_pm(s, 0, 1, {{0, 0}, {-1, 0}, {0, -1}});
  ReflectionFamily rf;
  {
    HyperplaneFamily h;  // 30-degree lines through A and B: u2 - u1 = k
    h.a = {-1, 1};
    h.cell_offset = {Rat(0), Rat(0)};
    h.rcell = {0, 1};
    h.mat = {0, 1, 1, 0};  // swap (u1, u2)
    h.tvec = {{0, 0}, {0, 0}};
    rf.planes.push_back(h);
  }
  {
    HyperplaneFamily h;  // vertical lines: 2*u1 + u2 = k (B offset 1)
    h.a = {2, 1};
    h.cell_offset = {Rat(0), Rat(1)};
    h.rcell = {0, 1};
    h.mat = {-1, -1, 0, 1};  // (u1,u2) -> (-u1-u2, u2); B additionally -v1
    h.tvec = {{0, 0}, {-1, 0}};
    rf.planes.push_back(h);
  }
  rf.symmetric_families = true;
  s.reflections = std::move(rf);
  return s;
}

// Tetrakis-square (Union Jack): corners V (degree 8) on Z^2, centers C
// (degree 4) at (1/2,1/2); square edges between corners plus diagonals
// corner-center.
inline TilingSpec builtin_tetrakis() {
  TilingSpec s;
  s.name = "tetrakis";
  s.dim = 2;
  s.basis = {1.0, 0.0, 0.0, 1.0};
  s.cells = {{Rat(0), Rat(0)}, {Rat(1, 2), Rat(1, 2)}};
  detail::add_offsets_pm(s, 0, 0, {{1, 0}, {0, 1}});
  for (auto o : {std::vector<int>{0, 0}, {-1, 0}, {0, -1}, {-1, -1}})
    detail::add_edge_pair(s, 0, 1, o);
  ReflectionFamily rf;
  for (int axis = 0; axis < 2; ++axis) {
    HyperplaneFamily h;
    h.a = {axis == 0 ? 1 : 0, axis == 0 ? 0 : 1};
    h.cell_offset = {Rat(0), Rat(1, 2)};
    h.rcell = {0, 1};
    h.mat = {axis == 0 ? -1 : 1, 0, 0, axis == 0 ? 1 : -1};
    std::vector<int> tc(2, 0);
    tc[axis] = -1;  // center cell shifts to keep position half-integral
    h.tvec = {{0, 0}, tc};
    rf.planes.push_back(h);
    rf.region.push_back({axis, Rat(0), Rat(1)});
  }
  rf.symmetric_families = true;
  s.reflections = std::move(rf);
  return s;
}

// Face-centered cubic: basis v1=(1,0,0), v2=(1/2,sqrt3/2,0),
// v3=(1/2, 1/(2 sqrt3), sqrt(2/3)); twelve neighbours are the pairwise
// differences of {0, v1, v2, v3}.
inline TilingSpec builtin_fcc() {
  TilingSpec s;
  s.name = "fcc";
  s.dim = 3;
  double s3 = std::sqrt(3.0);
  s.basis = {1.0, 0.0, 0.0,
             0.5, s3 / 2.0, 0.0,
             0.5, 1.0 / (2.0 * s3), std::sqrt(2.0 / 3.0)};
  s.cells = {{Rat(0), Rat(0), Rat(0)}};
  detail::add_offsets_pm(s, 0, 0,
                         {{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                          {1, -1, 0}, {0, 1, -1}, {1, 0, -1}});
  return s;
}

// D4 lattice in rotated/scaled coordinates where the reflection
// hyperplanes are the coordinate planes {y_i = k}.  Vertices are the
// checkerboard points of Z^4 (even coordinate sum); each vertex has the 24
// neighbours with exactly two nonzero coordinates equal to +-1.  The
// translation lattice used here is 2 Z^4, giving 8 cells (the even
// vectors of {0,1}^4).
inline TilingSpec builtin_d4() {
  TilingSpec s;
  s.name = "d4";
  s.dim = 4;
  s.basis.assign(16, 0.0);
  for (int i = 0; i < 4; ++i) s.basis[i * 4 + i] = 2.0;
  std::vector<std::array<int, 4>> reps;
  for (int mask = 0; mask < 16; ++mask) {
    int pop = __builtin_popcount(mask);
    if (pop % 2 != 0) continue;
    reps.push_back({(mask >> 0) & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1});
  }
  // Cell 0 must be the origin; reps[0] is {0,0,0,0} by construction.
  auto cell_of = [&](const std::array<int, 4>& y) {
    for (std::size_t c = 0; c < reps.size(); ++c)
      if (reps[c] == y) return int(c);
    throw std::logic_error("d4: cell lookup");
  };
  for (const auto& r : reps) {
    std::vector<Rat> pos;
    for (int i = 0; i < 4; ++i) pos.push_back(Rat(r[i], 2));
    s.cells.push_back(std::move(pos));
  }
  // Neighbour vectors: two nonzero entries, each +-1.
  std::vector<std::array<int, 4>> nbrs;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int si : {-1, 1})
        for (int sj : {-1, 1}) {
          std::array<int, 4> v{0, 0, 0, 0};
          v[i] = si;
          v[j] = sj;
          nbrs.push_back(v);
        }
  for (int c = 0; c < int(reps.size()); ++c) {
    for (const auto& nb : nbrs) {
      std::array<int, 4> y;
      std::array<int, 4> ymod;
      for (int i = 0; i < 4; ++i) {
        y[i] = reps[c][i] + nb[i];
        ymod[i] = ((y[i] % 2) + 2) % 2;
      }
      int c2 = cell_of(ymod);
      std::vector<int> off(4);
      for (int i = 0; i < 4; ++i) off[i] = (y[i] - reps[c2][i]) / 2;
      s.edges.push_back({c, c2, off, 1});
    }
  }
  ReflectionFamily rf;
  for (int axis = 0; axis < 4; ++axis) {
    // Family {y_axis = k}: value = 2*lam_axis + rep_axis.
    HyperplaneFamily h;
    h.a.assign(4, 0);
    h.a[axis] = 2;
    for (const auto& r : reps) h.cell_offset.push_back(Rat(r[axis]));
    for (int c = 0; c < int(reps.size()); ++c) h.rcell.push_back(c);
    h.mat.assign(16, 0);
    for (int i = 0; i < 4; ++i) h.mat[i * 4 + i] = (i == axis) ? -1 : 1;
    for (int c = 0; c < int(reps.size()); ++c) {
      std::vector<int> t(4, 0);
      t[axis] = -reps[c][axis];
      h.tvec.push_back(std::move(t));
    }
    rf.planes.push_back(std::move(h));
    rf.region.push_back({axis, Rat(0), Rat(1)});
  }
  rf.symmetric_families = true;
  s.reflections = std::move(rf);
  return s;
}

inline TilingSpec builtin_spec(const std::string& name) {
  if (name == "square") return builtin_square();
  if (name == "triangular") return builtin_triangular();
  if (name == "hexagonal" || name == "hex") return builtin_hexagonal();
  if (name == "tetrakis") return builtin_tetrakis();
  if (name == "fcc") return builtin_fcc();
  if (name == "d4") return builtin_d4();
  if (name.size() == 2 && name[0] == 'z' && name[1] >= '1' && name[1] <= '8')
    return builtin_zd(name[1] - '0');
  throw std::invalid_argument("unknown built-in spec: " + name);
}

inline std::vector<std::string> builtin_names() {
  return {"square", "triangular", "hexagonal", "tetrakis",
          "z1", "z3", "z4", "z5", "z6", "z7", "z8", "fcc", "d4"};
}

}  // namespace tilepile
