#pragma once

// Support polytope of the graphical MLE and the Markov-expansion sequence.

#include <cstddef>
#include <vector>

#include "lcgm/graph.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/sample.hpp"

namespace lcgm {

namespace detail {

inline void append_lifted(const Polytope& q, const VertexSet& coords, std::size_t dim,
                          std::vector<Halfspace>& ineqs, std::vector<Halfspace>& eqs) {
  auto [i, e] = lifted_constraints(q, coords, dim);
  ineqs.insert(ineqs.end(), i.begin(), i.end());
  eqs.insert(eqs.end(), e.begin(), e.end());
}

}  // namespace detail

/// Intersection of pi_C^{-1}(pi_C(P)) over the given coordinate blocks, which
/// must cover every coordinate so that the result is bounded.
inline Polytope preimage_intersection(const Polytope& p, const std::vector<VertexSet>& blocks) {
  if (p.is_empty()) return p;
  std::vector<Halfspace> ineqs, eqs;
  for (const auto& c : blocks) detail::append_lifted(project(p, c), c, p.dim(), ineqs, eqs);
  return Polytope::from_constraints(p.dim(), ineqs, eqs);
}

/// S_{G,X}: intersection over maximal cliques C of pi_C^{-1}(pi_C(conv X)).
inline Polytope support_polytope(const Graph& g, const Sample& x) {
  if (static_cast<std::size_t>(g.d()) != x.dim)
    fail(ErrorKind::DimensionMismatch, "graph and sample dimensions differ");
  Polytope hull = Polytope::hull(x.points, x.dim);
  return preimage_intersection(hull, maximal_cliques(g));
}

/// pi_{A∪S}^{-1}(pi_{A∪S}(D)) ∩ pi_{B∪S}^{-1}(pi_{B∪S}(D)).
inline Polytope markov_expand(const Polytope& d, const MarkovStatement& st) {
  return preimage_intersection(d, {set_union(st.a, st.s), set_union(st.b, st.s)});
}

struct DSetSequence {
  /// D^(0), ..., D^(index); the last entry is the limit when `stabilized`.
  std::vector<Polytope> sets;
  std::vector<Rational> volumes;
  std::size_t index = 0;
  bool stabilized = false;  // false means the iteration cap was hit
  Polytope support;
  Rational support_volume;
};

inline constexpr std::size_t kDefaultDSetIterations = 64;

inline DSetSequence dset_sequence(const Graph& g, const Sample& x, std::size_t max_iter = kDefaultDSetIterations) {
  DSetSequence out;
  out.support = support_polytope(g, x);
  out.support_volume = out.support.volume();
  auto statements = markov_statements(g);

  Polytope current = Polytope::hull(x.points, x.dim);
  auto record = [&](const Polytope& p) {
    for (const auto& v : p.vertices())
      if (!out.support.contains(v)) fail(ErrorKind::ValidationError, "D-set escapes the support polytope");
    out.sets.push_back(p);
    out.volumes.push_back(p.volume());
  };
  record(current);
  if (statements.empty()) {
    out.stabilized = true;
    return out;
  }
  for (std::size_t i = 0; i < max_iter; ++i) {
    std::vector<RPoint> pts = current.vertices();
    for (const auto& st : statements) {
      auto e = markov_expand(current, st);
      pts.insert(pts.end(), e.vertices().begin(), e.vertices().end());
    }
    Polytope next = Polytope::hull(std::move(pts), x.dim);
    if (next == current) {
      out.index = i;
      out.stabilized = true;
      return out;
    }
    current = std::move(next);
    record(current);
  }
  out.index = max_iter;
  return out;
}

}  // namespace lcgm
