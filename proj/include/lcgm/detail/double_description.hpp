#pragma once

// Double-description enumeration of the extreme rays of a pointed cone
// { x : A x >= 0 } over the integers.

#include <boost/dynamic_bitset.hpp>

#include <cstddef>
#include <vector>

#include "lcgm/error.hpp"
#include "lcgm/rational.hpp"

namespace lcgm::detail {

using IVec = std::vector<Integer>;
using Bits = boost::dynamic_bitset<>;

struct ConeRays {
  std::vector<IVec> rays;
  // tight[r][i] is set when row i vanishes on ray r.
  std::vector<Bits> tight;
};

inline Integer dot(const IVec& a, const IVec& b) {
  Integer s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void make_primitive(IVec& v) {
  Integer g = 0;
  for (const auto& x : v) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
  if (g > 1)
    for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
}

/// Indices of a maximal linearly independent subset of `rows`, chosen greedily in order.
inline std::vector<std::size_t> independent_rows(const std::vector<IVec>& rows, std::size_t dim) {
  std::vector<std::vector<Rational>> basis;  // reduced rows, with pivot columns
  std::vector<std::size_t> pivot_col, chosen;
  for (std::size_t r = 0; r < rows.size() && chosen.size() < dim; ++r) {
    std::vector<Rational> v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = rows[r][j];
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const Rational& f = v[pivot_col[b]];
      if (f == 0) continue;
      Rational factor = f / basis[b][pivot_col[b]];
      for (std::size_t j = 0; j < dim; ++j) v[j] -= factor * basis[b][j];
    }
    std::size_t p = dim;
    for (std::size_t j = 0; j < dim; ++j)
      if (v[j] != 0) { p = j; break; }
    if (p == dim) continue;
    basis.push_back(std::move(v));
    pivot_col.push_back(p);
    chosen.push_back(r);
  }
  return chosen;
}

/// Solves B X = I for square rational B; returns the columns of B^{-1}.
inline std::vector<std::vector<Rational>> inverse_columns(const std::vector<IVec>& B) {
  const std::size_t n = B.size();
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) M[i][j] = B[i][j];
    M[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (M[p][c] == 0) ++p;
    std::swap(M[p], M[c]);
    Rational inv = 1 / M[c][c];
    for (auto& x : M[c]) x *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || M[r][c] == 0) continue;
      Rational f = M[r][c];
      for (std::size_t j = c; j < 2 * n; ++j) M[r][j] -= f * M[c][j];
    }
  }
  std::vector<std::vector<Rational>> cols(n, std::vector<Rational>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = M[i][n + j];
  return cols;
}

/// Extreme rays of { x in R^dim : row . x >= 0 for every row }.
/// Throws Unbounded when the cone has a nontrivial lineality space.
inline ConeRays extreme_rays(const std::vector<IVec>& rows, std::size_t dim) {
  const std::size_t m = rows.size();
  ConeRays out;
  if (dim == 0) return out;
  auto basis = independent_rows(rows, dim);
  if (basis.size() < dim) fail(ErrorKind::Unbounded, "cone is not pointed");

  std::vector<IVec> B;
  for (auto r : basis) B.push_back(rows[r]);
  auto cols = inverse_columns(B);

  std::vector<IVec> rays;
  std::vector<Bits> tight;
  for (std::size_t j = 0; j < dim; ++j) {
    rays.push_back(primitive_integer(cols[j]));
    Bits t(m);
    for (std::size_t i = 0; i < dim; ++i)
      if (i != j) t.set(basis[i]);
    tight.push_back(std::move(t));
  }

  Bits is_basis(m);
  for (auto r : basis) is_basis.set(r);

  const std::size_t need = dim >= 2 ? dim - 2 : 0;
  std::vector<Integer> s;
  for (std::size_t row = 0; row < m; ++row) {
    if (is_basis.test(row)) continue;
    const IVec& a = rows[row];
    s.resize(rays.size());
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      s[r] = dot(a, rays[r]);
      int sg = sgn(s[r]);
      if (sg > 0) pos.push_back(r);
      else if (sg < 0) neg.push_back(r);
      else tight[r].set(row);
    }
    if (neg.empty()) continue;

    std::vector<IVec> new_rays;
    std::vector<Bits> new_tight;
    for (auto p : pos) {
      for (auto n : neg) {
        Bits z = tight[p] & tight[n];
        if (z.count() < need) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
          if (r == p || r == n) continue;
          if (z.is_subset_of(tight[r])) adjacent = false;
        }
        if (!adjacent) continue;
        IVec v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = s[p] * rays[n][j] - s[n] * rays[p][j];
        make_primitive(v);
        z.set(row);
        new_rays.push_back(std::move(v));
        new_tight.push_back(std::move(z));
      }
    }

    std::vector<IVec> kept;
    std::vector<Bits> kept_tight;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      if (sgn(s[r]) < 0) continue;
      kept.push_back(std::move(rays[r]));
      kept_tight.push_back(std::move(tight[r]));
    }
    for (std::size_t r = 0; r < new_rays.size(); ++r) {
      kept.push_back(std::move(new_rays[r]));
      kept_tight.push_back(std::move(new_tight[r]));
    }
    rays = std::move(kept);
    tight = std::move(kept_tight);
  }
  out.rays = std::move(rays);
  out.tight = std::move(tight);
  return out;
}

}  // namespace lcgm::detail
