#pragma once

// Tent functions: least concave majorants of (site, height) pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "lcgm/detail/double_description.hpp"
#include "lcgm/error.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/rational.hpp"

namespace lcgm {

/// One upper facet of the lifted configuration: h(q) = slope.q + offset on its cell,
/// with q the point in the domain's free coordinates.
struct TentFacet {
  std::vector<Rational> slope;
  Rational offset;
  std::vector<std::size_t> sites;  // sites lying on the facet (heights attained)

  Rational value(const RPoint& q) const {
    Rational s = offset;
    for (std::size_t j = 0; j < slope.size(); ++j) s += slope[j] * q[j];
    return s;
  }
};

class TentFunction {
 public:
  TentFunction() = default;

  /// Exact construction. Heights may come from doubles via from_double.
  TentFunction(std::vector<RPoint> sites, std::vector<Rational> heights) {
    if (sites.empty()) fail(ErrorKind::ValidationError, "tent function needs at least one site");
    if (sites.size() != heights.size()) fail(ErrorKind::DimensionMismatch, "one height per site required");
    dim_ = sites.front().size();
    sites_ = std::move(sites);
    heights_ = std::move(heights);
    for (auto& h : heights_) h.canonicalize();
    for (auto& p : sites_) {
      if (p.size() != dim_) fail(ErrorKind::DimensionMismatch, "sites have different dimensions");
      for (auto& x : p) x.canonicalize();
    }
    domain_ = Polytope::hull(sites_, dim_);
    free_ = domain_.free_coordinates();
    build();
  }

  static TentFunction from_doubles(std::vector<RPoint> sites, const std::vector<double>& heights) {
    std::vector<Rational> h;
    h.reserve(heights.size());
    for (double v : heights) h.push_back(from_double(v));
    return TentFunction(std::move(sites), std::move(h));
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return sites_.size(); }
  const std::vector<RPoint>& sites() const { return sites_; }
  const std::vector<Rational>& heights() const { return heights_; }
  const Polytope& domain() const { return domain_; }
  const std::vector<TentFacet>& facets() const { return facets_; }
  bool active(std::size_t i) const { return active_[i]; }
  bool full_dimensional() const { return domain_.full_dimensional(); }

  /// Point in the free coordinates of the domain's affine hull.
  RPoint reduce(const RPoint& x) const {
    RPoint q(free_.size());
    for (std::size_t t = 0; t < free_.size(); ++t) q[t] = x[free_[t]];
    return q;
  }

  /// Exact value; nullopt stands for -infinity outside the domain.
  std::optional<Rational> eval(const RPoint& x) const {
    if (!domain_.contains(x)) return std::nullopt;
    RPoint q = reduce(x);
    std::optional<Rational> best;
    for (const auto& f : facets_) {
      Rational v = f.value(q);
      if (!best || v < *best) best = v;
    }
    return best;
  }

  /// Value at a floating-point location (evaluated exactly, then rounded); -inf outside.
  double eval(const std::vector<double>& x) const {
    RPoint r(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) r[j] = from_double(x[j]);
    auto v = eval(r);
    return v ? v->get_d() : -std::numeric_limits<double>::infinity();
  }

  /// Sites of each facet after merging coincident locations (first index wins).
  std::vector<std::size_t> cell_sites(std::size_t f) const {
    std::map<RPoint, std::size_t> seen;
    std::vector<std::size_t> out;
    for (auto i : facets_[f].sites)
      if (seen.emplace(reduce(sites_[i]), i).second) out.push_back(i);
    return out;
  }

  /// Cell of facet f as a polytope in the free coordinates, plus the site index of each vertex.
  std::pair<Polytope, std::vector<std::size_t>> cell(std::size_t f) const {
    auto idx = cell_sites(f);
    std::vector<RPoint> pts;
    for (auto i : idx) pts.push_back(reduce(sites_[i]));
    Polytope p = Polytope::hull(pts, free_.size());
    std::map<RPoint, std::size_t> where;
    for (std::size_t t = 0; t < idx.size(); ++t) where.emplace(pts[t], idx[t]);
    std::vector<std::size_t> vsite;
    for (const auto& v : p.vertices()) vsite.push_back(where.at(v));
    return {std::move(p), std::move(vsite)};
  }

  /// Triangulation of the regular subdivision; simplices are lists of site indices.
  std::vector<std::vector<std::size_t>> triangulation() const {
    std::vector<std::vector<std::size_t>> out;
    const std::size_t k = free_.size();
    for (std::size_t f = 0; f < facets_.size(); ++f) {
      auto idx = cell_sites(f);
      if (idx.size() == k + 1) {
        std::sort(idx.begin(), idx.end());
        out.push_back(std::move(idx));
        continue;
      }
      auto [p, vsite] = cell(f);
      for (const auto& s : p.triangulate()) {
        std::vector<std::size_t> simplex;
        for (auto v : s) simplex.push_back(vsite[v]);
        std::sort(simplex.begin(), simplex.end());
        out.push_back(std::move(simplex));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void build() {
    const std::size_t n = sites_.size();
    const std::size_t k = free_.size();
    active_.assign(n, false);
    if (k == 0) {
      Rational top = *std::max_element(heights_.begin(), heights_.end());
      TentFacet f{{}, top, {}};
      for (std::size_t i = 0; i < n; ++i)
        if (heights_[i] == top) {
          f.sites.push_back(i);
          active_[i] = true;
        }
      facets_.push_back(std::move(f));
      return;
    }
    // Valid inequalities a.q + a_y y + c >= 0 of conv{(q_i, y_i)} + ray(0, -1).
    std::vector<detail::IVec> rows;
    rows.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Rational> r(k + 2);
      RPoint q = reduce(sites_[i]);
      for (std::size_t t = 0; t < k; ++t) r[t] = q[t];
      r[k] = heights_[i];
      r[k + 1] = 1;
      rows.push_back(primitive_integer(r));
    }
    {
      detail::IVec down(k + 2, Integer(0));
      down[k] = -1;
      rows.push_back(std::move(down));
    }
    auto cone = detail::extreme_rays(rows, k + 2);
    for (std::size_t r = 0; r < cone.rays.size(); ++r) {
      const auto& ray = cone.rays[r];
      if (sgn(ray[k]) >= 0) continue;  // vertical facets bound the domain only
      Integer scale = -ray[k];
      TentFacet f;
      f.slope.resize(k);
      for (std::size_t t = 0; t < k; ++t) {
        f.slope[t] = Rational(ray[t], scale);
        f.slope[t].canonicalize();
      }
      f.offset = Rational(ray[k + 1], scale);
      f.offset.canonicalize();
      for (std::size_t i = 0; i < n; ++i)
        if (cone.tight[r].test(i)) {
          f.sites.push_back(i);
          active_[i] = true;
        }
      facets_.push_back(std::move(f));
    }
    std::sort(facets_.begin(), facets_.end(), [](const TentFacet& a, const TentFacet& b) {
      if (a.slope != b.slope) return lex_less(a.slope, b.slope);
      return a.offset < b.offset;
    });
  }

  std::size_t dim_ = 0;
  std::vector<RPoint> sites_;
  std::vector<Rational> heights_;
  Polytope domain_;
  std::vector<std::size_t> free_;
  std::vector<TentFacet> facets_;
  std::vector<bool> active_;
};

inline TentFunction build_tent(std::vector<RPoint> sites, std::vector<Rational> heights) {
  return TentFunction(std::move(sites), std::move(heights));
}

inline std::optional<Rational> tent_eval(const TentFunction& t, const RPoint& x) { return t.eval(x); }

struct SubdivisionCell {
  Polytope poly;
  std::vector<std::size_t> vertex_sites;  // site index of each polytope vertex
  std::vector<Rational> slope;
  Rational offset;
};

/// Regions of linearity of a tent over a full-dimensional domain.
struct Subdivision {
  Polytope domain;
  std::vector<SubdivisionCell> cells;

  /// Index of some cell containing x, or nullopt.
  std::optional<std::size_t> locate(const RPoint& x) const {
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c].poly.contains(x)) return c;
    return std::nullopt;
  }
};

inline Subdivision regular_subdivision(const TentFunction& t) {
  if (!t.full_dimensional())
    fail(ErrorKind::DegenerateDomain, "sites do not span the ambient space; reduce coordinates first");
  Subdivision s;
  s.domain = t.domain();
  for (std::size_t f = 0; f < t.facets().size(); ++f) {
    auto [p, vsite] = t.cell(f);
    s.cells.push_back({std::move(p), std::move(vsite), t.facets()[f].slope, t.facets()[f].offset});
  }
  return s;
}

}  // namespace lcgm
