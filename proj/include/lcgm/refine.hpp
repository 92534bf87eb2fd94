#pragma once

// Common refinement of the clique subdivisions on the support polytope.

#include <cstddef>
#include <optional>
#include <vector>

#include "lcgm/detail/linalg.hpp"
#include "lcgm/graph.hpp"
#include "lcgm/integrate.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/support.hpp"
#include "lcgm/tent.hpp"

namespace lcgm {

/// Where a refined vertex sits in one clique subdivision.
struct CliqueLink {
  std::size_t cell = 0;              // cell of sigma_C
  std::vector<std::size_t> simplex;  // site indices of the triangle of that cell containing z_C
  std::vector<Rational> bary;        // barycentric coordinates of z_C in it
};

struct RefinedCell {
  Polytope poly;
  std::vector<std::size_t> clique_cells;  // one sigma_C cell per clique
};

struct RefinedSimplex {
  std::size_t cell = 0;
  std::vector<RPoint> vertices;
  std::vector<Rational> values;               // h(z) = sum_C h_C(z_C)
  std::vector<std::vector<CliqueLink>> links;  // [vertex][clique]
  Rational volume;
};

struct RefinedComplex {
  std::size_t dim = 0;
  CliqueList cliques;
  std::vector<Subdivision> subdivisions;  // sigma_C in clique coordinates
  std::vector<std::vector<std::vector<std::vector<std::size_t>>>> cell_triangulations;  // [clique][cell]
  Polytope support;
  std::vector<RefinedCell> cells;
  std::vector<RefinedSimplex> simplices;

  std::optional<std::size_t> locate(const RPoint& x) const {
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c].poly.contains(x)) return c;
    return std::nullopt;
  }

  /// sum_C of the affine piece of sigma_C active on the cell.
  Rational cell_value(std::size_t cell, const RPoint& x) const {
    Rational v = 0;
    for (std::size_t c = 0; c < cliques.size(); ++c) {
      const auto& sc = subdivisions[c].cells[cells[cell].clique_cells[c]];
      v += sc.offset;
      for (std::size_t j = 0; j < cliques[c].size(); ++j) v += sc.slope[j] * x[cliques[c][j]];
    }
    return v;
  }

  std::optional<Rational> value(const RPoint& x) const {
    auto c = locate(x);
    if (!c) return std::nullopt;
    return cell_value(*c, x);
  }

  /// Distinct vertices of the maximal cells (candidate tent poles).
  std::vector<RPoint> vertices() const {
    std::vector<RPoint> out;
    for (const auto& c : cells) out.insert(out.end(), c.poly.vertices().begin(), c.poly.vertices().end());
    std::sort(out.begin(), out.end(), lex_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

namespace detail {

inline RPoint project_point(const RPoint& x, const VertexSet& coords) {
  RPoint out;
  for (int v : coords) out.push_back(x[v]);
  return out;
}

/// Barycentric coordinates of x in the simplex with the given vertices, or nullopt
/// if x lies outside it.
inline std::optional<std::vector<Rational>> barycentric(const std::vector<RPoint>& v, const RPoint& x) {
  const std::size_t k = x.size();
  RMatrix m(k, std::vector<Rational>(k));
  std::vector<Rational> rhs(k), lam;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t q = 0; q < k; ++q) m[r][q] = v[q + 1][r] - v[0][r];
    rhs[r] = x[r] - v[0][r];
  }
  if (!solve(m, rhs, lam)) return std::nullopt;
  Rational first = 1;
  for (const auto& l : lam) first -= l;
  std::vector<Rational> out{first};
  out.insert(out.end(), lam.begin(), lam.end());
  for (const auto& l : out)
    if (l < 0) return std::nullopt;
  return out;
}

/// Codimension of the minimal face of a full-dimensional polytope containing x.
inline std::size_t face_codimension(const Polytope& p, const RPoint& x) {
  RMatrix normals;
  for (const auto& f : p.facets())
    if (Polytope::dot(f.a, x) == f.b) normals.push_back(f.a);
  return normals.empty() ? 0 : rank(normals, p.dim());
}

}  // namespace detail

/// Maximal cells are the full-dimensional intersections of preimages of clique
/// cells with the support; tuples are extended only while the partial
/// intersection stays full-dimensional.
inline RefinedComplex refine_subdivisions(const Graph& g, const std::vector<TentFunction>& tents,
                                          const Polytope& support) {
  RefinedComplex rc;
  rc.dim = static_cast<std::size_t>(g.d());
  rc.cliques = maximal_cliques(g);
  rc.support = support;
  if (tents.size() != rc.cliques.size()) fail(ErrorKind::DimensionMismatch, "one tent per maximal clique");
  if (support.dim() != rc.dim) fail(ErrorKind::DimensionMismatch, "support dimension differs from graph");
  if (!support.full_dimensional()) fail(ErrorKind::LowerDimensionalSupport, "support is not full-dimensional");
  const std::size_t t = rc.cliques.size();
  for (std::size_t c = 0; c < t; ++c) {
    if (tents[c].dim() != rc.cliques[c].size()) fail(ErrorKind::DimensionMismatch, "tent dimension differs from clique size");
    rc.subdivisions.push_back(regular_subdivision(tents[c]));
    std::vector<std::vector<std::vector<std::size_t>>> tri;
    for (const auto& cell : rc.subdivisions[c].cells) {
      std::vector<std::vector<std::size_t>> ts;
      for (const auto& s : cell.poly.triangulate()) {
        std::vector<std::size_t> sites;
        for (auto v : s) sites.push_back(cell.vertex_sites[v]);
        ts.push_back(std::move(sites));
      }
      tri.push_back(std::move(ts));
    }
    rc.cell_triangulations.push_back(std::move(tri));
  }

  std::vector<std::vector<std::vector<Halfspace>>> cell_lifted(t);
  for (std::size_t c = 0; c < t; ++c)
    for (const auto& cell : rc.subdivisions[c].cells)
      cell_lifted[c].push_back(lifted_constraints(cell.poly, rc.cliques[c], rc.dim).first);

  std::vector<std::size_t> choice(t);
  auto recurse = [&](auto&& self, std::size_t c, const Polytope& acc) -> void {
    if (c == t) {
      rc.cells.push_back({acc, choice});
      return;
    }
    for (std::size_t k = 0; k < cell_lifted[c].size(); ++k) {
      std::vector<Halfspace> next = acc.facets();
      next.insert(next.end(), cell_lifted[c][k].begin(), cell_lifted[c][k].end());
      // Bounded because the support constraints are present from the start.
      Polytope p = Polytope::from_constraints(rc.dim, next, {});
      if (!p.full_dimensional()) continue;
      choice[c] = k;
      self(self, c + 1, p);
    }
  };
  recurse(recurse, 0, support);

  for (std::size_t ci = 0; ci < rc.cells.size(); ++ci) {
    const auto& cell = rc.cells[ci];
    for (const auto& s : cell.poly.triangulate()) {
      RefinedSimplex rs;
      rs.cell = ci;
      rs.volume = cell.poly.simplex_volume(s);
      for (auto v : s) {
        const RPoint& z = cell.poly.vertices()[v];
        rs.vertices.push_back(z);
        rs.values.push_back(rc.cell_value(ci, z));
        std::vector<CliqueLink> links;
        for (std::size_t c = 0; c < t; ++c) {
          CliqueLink link;
          link.cell = cell.clique_cells[c];
          RPoint zc = detail::project_point(z, rc.cliques[c]);
          for (const auto& tri : rc.cell_triangulations[c][link.cell]) {
            std::vector<RPoint> pts;
            for (auto i : tri) pts.push_back(tents[c].sites()[i]);
            if (auto b = detail::barycentric(pts, zc)) {
              link.simplex = tri;
              link.bary = std::move(*b);
              break;
            }
          }
          links.push_back(std::move(link));
        }
        rs.links.push_back(std::move(links));
      }
      rc.simplices.push_back(std::move(rs));
    }
  }
  return rc;
}

/// Integral of exp(sum_C h_C) over the support, summed over the refined simplices.
inline double total_integral(const Graph& g, const std::vector<TentFunction>& tents, const Polytope& support) {
  auto rc = refine_subdivisions(g, tents, support);
  std::vector<double> parts;
  for (const auto& s : rc.simplices) {
    std::vector<double> vals;
    for (const auto& v : s.values) vals.push_back(v.get_d());
    parts.push_back(exp_simplex_from_volume(s.volume.get_d(), vals).integral);
  }
  return detail::pairwise_sum(parts);
}

struct CodimReport {
  std::size_t k_z = 0;
  std::vector<std::size_t> k_clique;  // one per maximal clique
  bool is_vertex = false;             // z is a vertex of the refined subdivision
  std::size_t clique_sum() const {
    std::size_t s = 0;
    for (auto k : k_clique) s += k;
    return s;
  }
  /// k_z <= sum_C k_{z,C}, and at vertices sum_C k_{z,C} >= d.
  bool bounds_hold(std::size_t d) const { return k_z <= clique_sum() && (!is_vertex || clique_sum() >= d); }
};

inline CodimReport codim_report(const RefinedComplex& rc, const RPoint& z) {
  if (z.size() != rc.dim) fail(ErrorKind::DimensionMismatch, "point dimension differs from complex");
  auto cell = rc.locate(z);
  if (!rc.support.contains(z) || !cell) fail(ErrorKind::PointOutsideSupport, "point lies outside the support");
  CodimReport r;
  r.k_z = detail::face_codimension(rc.cells[*cell].poly, z);
  r.is_vertex = r.k_z == rc.dim;
  for (std::size_t c = 0; c < rc.cliques.size(); ++c) {
    RPoint zc = detail::project_point(z, rc.cliques[c]);
    const auto& sc = rc.subdivisions[c].cells[rc.cells[*cell].clique_cells[c]];
    r.k_clique.push_back(detail::face_codimension(sc.poly, zc));
  }
  return r;
}

}  // namespace lcgm
