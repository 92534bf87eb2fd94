#pragma once

// Exact rational polytopes carried in both vertex and facet form.

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "lcgm/detail/double_description.hpp"
#include "lcgm/detail/linalg.hpp"
#include "lcgm/error.hpp"
#include "lcgm/rational.hpp"

namespace lcgm {

using Bits = boost::dynamic_bitset<>;

/// a.x <= b, or a.x == b when used as an equation.
struct Halfspace {
  std::vector<Rational> a;
  Rational b;

  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

inline bool operator<(const Halfspace& x, const Halfspace& y) {
  if (x.a != y.a) return lex_less(x.a, y.a);
  return x.b < y.b;
}

class Polytope {
 public:
  Polytope() = default;

  static Polytope empty(std::size_t dim) {
    Polytope p;
    p.dim_ = dim;
    p.affine_dim_ = -1;
    return p;
  }

  /// Convex hull of a finite point set.
  static Polytope hull(std::vector<RPoint> pts, std::size_t dim) {
    for (const auto& x : pts)
      if (x.size() != dim) fail(ErrorKind::DimensionMismatch, "point dimension differs from ambient dimension");
    std::sort(pts.begin(), pts.end(), lex_less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.empty()) return empty(dim);

    Polytope p;
    p.dim_ = dim;
    const RPoint& p0 = pts.front();

    detail::RMatrix diffs;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      std::vector<Rational> v(dim);
      for (std::size_t j = 0; j < dim; ++j) v[j] = pts[i][j] - p0[j];
      diffs.push_back(std::move(v));
    }
    auto pivots = detail::rref(diffs, dim);
    const std::size_t k = pivots.size();
    p.affine_dim_ = static_cast<int>(k);
    p.pivots_ = pivots;

    // One equation per non-pivot coordinate.
    std::vector<bool> is_pivot(dim, false);
    for (auto c : pivots) is_pivot[c] = true;
    for (std::size_t f = 0; f < dim; ++f) {
      if (is_pivot[f]) continue;
      std::vector<Rational> a(dim);
      a[f] = 1;
      for (std::size_t r = 0; r < k; ++r) a[pivots[r]] = -diffs[r][f];
      Rational b = 0;
      for (std::size_t j = 0; j < dim; ++j) b += a[j] * p0[j];
      p.equations_.push_back(normalize(Halfspace{std::move(a), std::move(b)}));
    }
    std::sort(p.equations_.begin(), p.equations_.end());

    if (k == 0) {
      p.vertices_ = {p0};
      return p;
    }

    std::vector<detail::IVec> rows;
    rows.reserve(pts.size());
    for (const auto& x : pts) {
      std::vector<Rational> r(k + 1);
      for (std::size_t t = 0; t < k; ++t) r[t] = x[pivots[t]];
      r[k] = 1;
      rows.push_back(primitive_integer(r));
    }
    auto cone = detail::extreme_rays(rows, k + 1);

    // A point is a vertex iff the facets through it meet only in it.
    const std::size_t n = pts.size();
    std::vector<bool> is_vertex(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      Bits meet(n);
      meet.set();
      bool any = false;
      for (const auto& t : cone.tight)
        if (t.test(i)) {
          meet &= t;
          any = true;
        }
      is_vertex[i] = any && meet.count() == 1;
    }
    std::vector<std::size_t> new_index(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i)
      if (is_vertex[i]) {
        new_index[i] = p.vertices_.size();
        p.vertices_.push_back(pts[i]);
      }

    std::vector<std::pair<Halfspace, Bits>> facets;
    for (std::size_t r = 0; r < cone.rays.size(); ++r) {
      const auto& ray = cone.rays[r];
      std::vector<Rational> a(dim);
      for (std::size_t t = 0; t < k; ++t) a[pivots[t]] = -Rational(ray[t]);
      Bits on(p.vertices_.size());
      for (std::size_t i = 0; i < n; ++i)
        if (is_vertex[i] && cone.tight[r].test(i)) on.set(new_index[i]);
      facets.emplace_back(Halfspace{std::move(a), Rational(ray[k])}, std::move(on));
    }
    std::sort(facets.begin(), facets.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [h, on] : facets) {
      p.facets_.push_back(std::move(h));
      p.facet_vertices_.push_back(std::move(on));
    }
    return p;
  }

  /// Bounded polyhedron { x : a.x <= b for ineqs, a.x == b for eqs }.
  static Polytope from_constraints(std::size_t dim, const std::vector<Halfspace>& ineqs,
                                   const std::vector<Halfspace>& eqs = {}) {
    std::vector<detail::IVec> rows;
    auto push = [&](const std::vector<Rational>& a, const Rational& b, int sign) {
      if (a.size() != dim) fail(ErrorKind::DimensionMismatch, "constraint dimension differs from ambient dimension");
      std::vector<Rational> r(dim + 1);
      for (std::size_t j = 0; j < dim; ++j) r[j] = -sign * a[j];
      r[dim] = sign * b;
      rows.push_back(primitive_integer(r));
    };
    for (const auto& h : ineqs) push(h.a, h.b, 1);
    for (const auto& h : eqs) {
      push(h.a, h.b, 1);
      push(h.a, h.b, -1);
    }
    {
      std::vector<Rational> t(dim + 1);
      t[dim] = 1;
      rows.push_back(primitive_integer(t));
    }
    // Duplicate rows only slow the enumeration down.
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

    auto cone = detail::extreme_rays(rows, dim + 1);
    std::vector<std::pair<RPoint, std::size_t>> found;  // vertex, ray index
    bool recession = false;
    for (std::size_t r = 0; r < cone.rays.size(); ++r) {
      const auto& ray = cone.rays[r];
      if (ray[dim] == 0) {
        recession = true;
        continue;
      }
      RPoint x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = Rational(ray[j], ray[dim]);
      for (auto& c : x) c.canonicalize();
      found.emplace_back(std::move(x), r);
    }
    if (found.empty()) return empty(dim);
    if (recession) fail(ErrorKind::Unbounded, "constraint system is unbounded");
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return lex_less(x.first, y.first); });
    std::vector<RPoint> verts;
    for (const auto& f : found) verts.push_back(f.first);
    if (!eqs.empty() || found.size() <= dim) return hull(std::move(verts), dim);

    // Full-dimensional case: the enumeration already knows which rows are tight at
    // which vertex; facets are the rows with maximal tight sets.
    detail::RMatrix diffs;
    for (std::size_t i = 1; i < verts.size(); ++i) {
      std::vector<Rational> v(dim);
      for (std::size_t j = 0; j < dim; ++j) v[j] = verts[i][j] - verts[0][j];
      diffs.push_back(std::move(v));
    }
    auto pivots = detail::rref(diffs, dim);
    if (pivots.size() < dim) return hull(std::move(verts), dim);

    const std::size_t m = rows.size();
    std::vector<Bits> on(m, Bits(verts.size()));
    for (std::size_t v = 0; v < found.size(); ++v) {
      const Bits& t = cone.tight[found[v].second];
      for (auto i = t.find_first(); i != Bits::npos; i = t.find_next(i)) on[i].set(v);
    }
    Polytope p;
    p.dim_ = dim;
    p.affine_dim_ = static_cast<int>(dim);
    p.pivots_ = std::move(pivots);
    p.vertices_ = std::move(verts);
    std::vector<std::pair<Halfspace, Bits>> facets;
    for (std::size_t i = 0; i < m; ++i) {
      if (on[i].count() < dim) continue;
      bool maximal = true;
      for (std::size_t j = 0; j < m && maximal; ++j)
        if (j != i && on[i].is_proper_subset_of(on[j])) maximal = false;
      if (!maximal) continue;
      std::vector<Rational> a(dim);
      for (std::size_t j = 0; j < dim; ++j) a[j] = -Rational(rows[i][j]);
      facets.emplace_back(Halfspace{std::move(a), Rational(rows[i][dim])}, on[i]);
    }
    std::sort(facets.begin(), facets.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [h, fv] : facets) {
      p.facets_.push_back(std::move(h));
      p.facet_vertices_.push_back(std::move(fv));
    }
    return p;
  }

  std::size_t dim() const { return dim_; }
  int affine_dim() const { return affine_dim_; }
  bool is_empty() const { return affine_dim_ < 0; }
  bool full_dimensional() const { return affine_dim_ == static_cast<int>(dim_); }

  const std::vector<RPoint>& vertices() const { return vertices_; }
  const std::vector<Halfspace>& facets() const { return facets_; }
  const std::vector<Halfspace>& equations() const { return equations_; }
  /// facet_vertices()[f] marks the vertices lying on facet f.
  const std::vector<Bits>& facet_vertices() const { return facet_vertices_; }
  /// Coordinates that parametrize the affine hull.
  const std::vector<std::size_t>& free_coordinates() const { return pivots_; }

  bool contains(const RPoint& x) const {
    if (x.size() != dim_) fail(ErrorKind::DimensionMismatch, "point dimension differs from polytope dimension");
    if (is_empty()) return false;
    for (const auto& e : equations_)
      if (dot(e.a, x) != e.b) return false;
    for (const auto& h : facets_)
      if (dot(h.a, x) > h.b) return false;
    return true;
  }

  /// Triangulation by pulling vertices in index order. Each simplex lists
  /// affine_dim()+1 vertex indices.
  std::vector<std::vector<std::size_t>> triangulate() const {
    std::vector<std::vector<std::size_t>> out;
    if (is_empty()) return out;
    if (affine_dim_ == 0) return {{0}};
    Bits all(vertices_.size());
    all.set();
    std::vector<std::size_t> prefix;
    pull(all, affine_dim_, prefix, out);
    return out;
  }

  /// Lebesgue measure in the ambient space (0 when not full-dimensional).
  Rational volume() const {
    if (!full_dimensional() || dim_ == 0) return 0;
    Rational total = 0;
    for (const auto& s : triangulate()) total += simplex_volume(s);
    return total;
  }

  Rational simplex_volume(const std::vector<std::size_t>& s) const {
    detail::RMatrix m;
    for (std::size_t i = 1; i < s.size(); ++i) {
      std::vector<Rational> row(dim_);
      for (std::size_t j = 0; j < dim_; ++j) row[j] = vertices_[s[i]][j] - vertices_[s[0]][j];
      m.push_back(std::move(row));
    }
    return abs(detail::determinant(std::move(m))) / detail::factorial(dim_);
  }

  /// Affine dimension of a subset of the vertices.
  int subset_dimension(const Bits& subset) const {
    auto first = subset.find_first();
    if (first == Bits::npos) return -1;
    detail::RMatrix m;
    for (auto i = subset.find_next(first); i != Bits::npos; i = subset.find_next(i)) {
      std::vector<Rational> row(pivots_.size());
      for (std::size_t t = 0; t < pivots_.size(); ++t)
        row[t] = vertices_[i][pivots_[t]] - vertices_[first][pivots_[t]];
      m.push_back(std::move(row));
    }
    return static_cast<int>(detail::rank(std::move(m), pivots_.size()));
  }

  friend bool operator==(const Polytope& p, const Polytope& q) {
    return p.dim_ == q.dim_ && p.vertices_ == q.vertices_;
  }

  static Rational dot(const std::vector<Rational>& a, const RPoint& x) {
    Rational s = 0;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[j] != 0) s += a[j] * x[j];
    return s;
  }

 private:
  static Halfspace normalize(Halfspace h) {
    std::vector<Rational> v = h.a;
    v.push_back(h.b);
    auto ints = primitive_integer(v);
    for (std::size_t j = 0; j < h.a.size(); ++j) h.a[j] = ints[j];
    h.b = ints.back();
    return h;
  }

  void pull(const Bits& face, int fdim, std::vector<std::size_t>& prefix,
            std::vector<std::vector<std::size_t>>& out) const {
    const std::size_t apex = face.find_first();
    if (fdim == 0) {
      prefix.push_back(apex);
      out.push_back(prefix);
      prefix.pop_back();
      return;
    }
    std::set<Bits> seen;
    prefix.push_back(apex);
    for (const auto& fv : facet_vertices_) {
      Bits g = face & fv;
      if (g.test(apex) || g.count() < static_cast<std::size_t>(fdim)) continue;
      if (!seen.insert(g).second) continue;
      if (subset_dimension(g) != fdim - 1) continue;
      pull(g, fdim - 1, prefix, out);
    }
    prefix.pop_back();
  }

  std::size_t dim_ = 0;
  int affine_dim_ = -1;
  std::vector<RPoint> vertices_;
  std::vector<Halfspace> facets_;
  std::vector<Halfspace> equations_;
  std::vector<Bits> facet_vertices_;
  std::vector<std::size_t> pivots_;
};

inline bool polytope_equal(const Polytope& p, const Polytope& q) { return p == q; }

/// Image under the coordinate projection onto `coords` (0-based, any order).
inline Polytope project(const Polytope& p, const std::vector<int>& coords) {
  if (coords.empty()) fail(ErrorKind::EmptyCoordinateSet, "projection onto no coordinates");
  for (int c : coords)
    if (c < 0 || static_cast<std::size_t>(c) >= p.dim()) fail(ErrorKind::DimensionMismatch, "projection coordinate out of range");
  std::vector<RPoint> pts;
  pts.reserve(p.vertices().size());
  for (const auto& v : p.vertices()) {
    RPoint x(coords.size());
    for (std::size_t t = 0; t < coords.size(); ++t) x[t] = v[coords[t]];
    pts.push_back(std::move(x));
  }
  return Polytope::hull(std::move(pts), coords.size());
}

/// Facets and equations of q (living on `coords`) rewritten in R^dim.
inline std::pair<std::vector<Halfspace>, std::vector<Halfspace>> lifted_constraints(
    const Polytope& q, const std::vector<int>& coords, std::size_t dim) {
  if (coords.size() != q.dim()) fail(ErrorKind::DimensionMismatch, "coordinate list does not match polytope dimension");
  auto pad = [&](const Halfspace& h) {
    Halfspace out{std::vector<Rational>(dim), h.b};
    for (std::size_t t = 0; t < coords.size(); ++t) out.a[coords[t]] = h.a[t];
    return out;
  };
  std::pair<std::vector<Halfspace>, std::vector<Halfspace>> out;
  for (const auto& h : q.facets()) out.first.push_back(pad(h));
  for (const auto& h : q.equations()) out.second.push_back(pad(h));
  return out;
}

/// Bounds lo <= x_j <= hi for one coordinate.
struct Interval {
  Rational lo, hi;
};

/// pi_S^{-1}(q) cut down by `box` on the coordinates outside S. `box` is indexed
/// by ambient coordinate; entries on S are ignored.
inline Polytope extrude_preimage(const Polytope& q, const std::vector<int>& coords, std::size_t dim,
                                 const std::vector<std::optional<Interval>>& box) {
  if (q.is_empty()) return Polytope::empty(dim);
  auto [ineqs, eqs] = lifted_constraints(q, coords, dim);
  std::vector<bool> in_s(dim, false);
  for (int c : coords) in_s[c] = true;
  for (std::size_t j = 0; j < dim; ++j) {
    if (in_s[j]) continue;
    if (j >= box.size() || !box[j]) fail(ErrorKind::Unbounded, "no bound given for a free coordinate");
    std::vector<Rational> e(dim);
    e[j] = 1;
    ineqs.push_back({e, box[j]->hi});
    e[j] = -1;
    ineqs.push_back({e, -box[j]->lo});
  }
  return Polytope::from_constraints(dim, ineqs, eqs);
}

inline Polytope intersect(const std::vector<Polytope>& ps) {
  if (ps.empty()) fail(ErrorKind::ValidationError, "intersection of no polytopes");
  const std::size_t dim = ps.front().dim();
  std::vector<Halfspace> ineqs, eqs;
  for (const auto& p : ps) {
    if (p.dim() != dim) fail(ErrorKind::DimensionMismatch, "polytopes live in different dimensions");
    if (p.is_empty()) return Polytope::empty(dim);
    ineqs.insert(ineqs.end(), p.facets().begin(), p.facets().end());
    eqs.insert(eqs.end(), p.equations().begin(), p.equations().end());
  }
  if (ps.size() == 1) return ps.front();
  return Polytope::from_constraints(dim, ineqs, eqs);
}

}  // namespace lcgm
