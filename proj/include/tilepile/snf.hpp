// Exact integer matrix algebra: Smith normal form with unimodular
// transforms, and a fraction-free determinant.  Arbitrary precision via
// Boost cpp_int; intended for reduced Laplacians of desk-scale graphs.
#pragma once

#include <vector>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "common.hpp"

namespace tilepile {

using BigInt = boost::multiprecision::cpp_int;

struct BigMatrix {
  int rows = 0, cols = 0;
  std::vector<BigInt> a;

  BigMatrix() = default;
  BigMatrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, 0) {}

  BigInt& operator()(int i, int j) { return a[std::size_t(i) * cols + j]; }
  const BigInt& operator()(int i, int j) const { return a[std::size_t(i) * cols + j]; }

  static BigMatrix identity(int n) {
    BigMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  BigMatrix operator*(const BigMatrix& o) const {
    if (cols != o.rows) throw std::invalid_argument("BigMatrix: shape mismatch");
    BigMatrix r(rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        if ((*this)(i, k) == 0) continue;
        for (int j = 0; j < o.cols; ++j) r(i, j) += (*this)(i, k) * o(k, j);
      }
    return r;
  }

  bool operator==(const BigMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

// Fraction-free (Bareiss) determinant; exact.
inline BigInt bareiss_det(BigMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("det: square matrix required");
  int n = m.rows;
  if (n == 0) return 1;
  BigInt sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (m(i, k) != 0) { p = i; break; }
      if (p < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

struct SNFDecomposition {
  BigMatrix U, D, V;  // U * A * V == D, U and V unimodular, D diagonal
  std::vector<BigInt> invariant_factors;  // nonzero d_1 | d_2 | ... | d_r
};

// Smith normal form by elementary row/column operations, tracking the
// unimodular transforms.  The result satisfies U*A*V == D exactly (checked
// by the caller or the `verify` flag) with d_i | d_{i+1}.
inline SNFDecomposition smith_normal_form(const BigMatrix& A, bool verify = true) {
  int n = A.rows, m = A.cols;
  SNFDecomposition s;
  s.D = A;
  s.U = BigMatrix::identity(n);
  s.V = BigMatrix::identity(m);
  auto& D = s.D;
  auto& U = s.U;
  auto& V = s.V;

  auto swap_rows = [&](int i, int j) {
    for (int k = 0; k < m; ++k) std::swap(D(i, k), D(j, k));
    for (int k = 0; k < n; ++k) std::swap(U(i, k), U(j, k));
  };
  auto swap_cols = [&](int i, int j) {
    for (int k = 0; k < n; ++k) std::swap(D(k, i), D(k, j));
    for (int k = 0; k < m; ++k) std::swap(V(k, i), V(k, j));
  };
  auto add_row = [&](int dst, int src, const BigInt& c) {  // row dst += c * row src
    for (int k = 0; k < m; ++k) D(dst, k) += c * D(src, k);
    for (int k = 0; k < n; ++k) U(dst, k) += c * U(src, k);
  };
  auto add_col = [&](int dst, int src, const BigInt& c) {
    for (int k = 0; k < n; ++k) D(k, dst) += c * D(k, src);
    for (int k = 0; k < m; ++k) V(k, dst) += c * V(k, src);
  };
  auto negate_row = [&](int i) {
    for (int k = 0; k < m; ++k) D(i, k) = -D(i, k);
    for (int k = 0; k < n; ++k) U(i, k) = -U(i, k);
  };

  int t = 0;
  while (t < n && t < m) {
    // Find a pivot: nonzero entry of minimal magnitude in the trailing block.
    int pi = -1, pj = -1;
    BigInt best = 0;
    for (int i = t; i < n; ++i)
      for (int j = t; j < m; ++j) {
        if (D(i, j) == 0) continue;
        BigInt mag = abs(D(i, j));
        if (pi < 0 || mag < best) { pi = i; pj = j; best = mag; }
      }
    if (pi < 0) break;  // trailing block is zero
    swap_rows(t, pi);
    swap_cols(t, pj);
    // Eliminate row/column t; restart if a remainder creates a smaller entry.
    bool clean = false;
    while (!clean) {
      clean = true;
      for (int i = t + 1; i < n; ++i) {
        if (D(i, t) == 0) continue;
        BigInt q = D(i, t) / D(t, t);
        add_row(i, t, -q);
        if (D(i, t) != 0) {  // remainder smaller than pivot: promote it
          swap_rows(t, i);
          clean = false;
        }
      }
      for (int j = t + 1; j < m; ++j) {
        if (D(t, j) == 0) continue;
        BigInt q = D(t, j) / D(t, t);
        add_col(j, t, -q);
        if (D(t, j) != 0) {
          swap_cols(t, j);
          clean = false;
        }
      }
    }
    // Divisibility: pivot must divide the rest of the trailing block.
    bool divides = true;
    for (int i = t + 1; i < n && divides; ++i)
      for (int j = t + 1; j < m; ++j)
        if (D(i, j) % D(t, t) != 0) {
          add_row(t, i, 1);  // fold row i into row t and redo the pivot step
          divides = false;
          break;
        }
    if (!divides) continue;
    if (D(t, t) < 0) negate_row(t);
    ++t;
  }
  for (int i = 0; i < std::min(n, m); ++i)
    if (D(i, i) != 0) s.invariant_factors.push_back(D(i, i));
  if (verify) {
    if (!(U * A * V == D))
      throw std::logic_error("smith_normal_form: U*A*V != D");
  }
  return s;
}

// Reduced Laplacian (D - A with the sink row/column deleted) as an exact
// integer matrix.
template <typename Graph>
inline BigMatrix reduced_laplacian_big(const Graph& g) {
  BigMatrix L(g.n, g.n);
  for (int v = 0; v < g.n; ++v) {
    L(v, v) = g.deg[v];
    for (std::size_t k = g.row_ptr[v]; k < g.row_ptr[v + 1]; ++k) {
      auto [t, mult] = g.adj[k];
      if (t != g.sink()) L(v, t) -= mult;
    }
  }
  return L;
}

}  // namespace tilepile
