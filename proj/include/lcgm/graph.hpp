#pragma once

// Undirected graphs on vertices 0..d-1 and their clique structure.

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lcgm/error.hpp"

namespace lcgm {

using VertexSet = std::vector<int>;  // sorted, 0-based

class Graph {
 public:
  Graph() = default;
  explicit Graph(int d) : d_(d), adj_(static_cast<std::size_t>(d), boost::dynamic_bitset<>(static_cast<std::size_t>(d))) {
    if (d < 0) fail(ErrorKind::ValidationError, "negative vertex count");
  }

  /// Rejects self-loops, duplicates and out-of-range endpoints.
  Graph(int d, const std::vector<std::pair<int, int>>& edges) : Graph(d) {
    for (auto [u, v] : edges) {
      check_vertex(u);
      check_vertex(v);
      if (u == v) fail(ErrorKind::ValidationError, "self-loop at vertex " + std::to_string(u + 1));
      if (adjacent(u, v))
        fail(ErrorKind::ValidationError, "duplicate edge " + std::to_string(u + 1) + "-" + std::to_string(v + 1));
      add_edge(u, v);
    }
  }

  static Graph complete(int d) {
    Graph g(d);
    for (int u = 0; u < d; ++u)
      for (int v = u + 1; v < d; ++v) g.add_edge(u, v);
    return g;
  }
  static Graph path(int d) {
    Graph g(d);
    for (int u = 0; u + 1 < d; ++u) g.add_edge(u, u + 1);
    return g;
  }
  static Graph cycle(int d) {
    Graph g = path(d);
    if (d >= 3) g.add_edge(0, d - 1);
    return g;
  }

  int d() const { return d_; }

  void add_edge(int u, int v) {
    adj_[u].set(v);
    adj_[v].set(u);
  }

  bool adjacent(int u, int v) const { return adj_[u].test(v); }

  const boost::dynamic_bitset<>& neighbours(int u) const { return adj_[u]; }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < d_; ++u)
      for (int v = u + 1; v < d_; ++v)
        if (adjacent(u, v)) out.emplace_back(u, v);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (const auto& a : adj_) c += a.count();
    return c / 2;
  }

  bool is_clique(const VertexSet& s) const {
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j)
        if (!adjacent(s[i], s[j])) return false;
    return true;
  }

  /// Subgraph on `vs` (sorted), relabelled 0..|vs|-1.
  Graph induced(const VertexSet& vs) const {
    Graph h(static_cast<int>(vs.size()));
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = i + 1; j < vs.size(); ++j)
        if (adjacent(vs[i], vs[j])) h.add_edge(static_cast<int>(i), static_cast<int>(j));
    return h;
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.d_ == b.d_ && a.adj_ == b.adj_; }

 private:
  void check_vertex(int u) const {
    if (u < 0 || u >= d_) fail(ErrorKind::ValidationError, "edge endpoint " + std::to_string(u + 1) + " out of range");
  }

  int d_ = 0;
  std::vector<boost::dynamic_bitset<>> adj_;
};

using CliqueList = std::vector<VertexSet>;

inline bool clique_order(const VertexSet& a, const VertexSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

inline VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

namespace detail {

inline void bron_kerbosch(const Graph& g, boost::dynamic_bitset<> r, boost::dynamic_bitset<> p,
                          boost::dynamic_bitset<> x, CliqueList& out) {
  if (p.none() && x.none()) {
    VertexSet c;
    for (auto v = r.find_first(); v != boost::dynamic_bitset<>::npos; v = r.find_next(v)) c.push_back(static_cast<int>(v));
    out.push_back(std::move(c));
    return;
  }
  // Pivot with the most neighbours in p.
  auto px = p | x;
  std::size_t pivot = px.find_first(), best = 0;
  for (auto u = px.find_first(); u != boost::dynamic_bitset<>::npos; u = px.find_next(u)) {
    auto c = (p & g.neighbours(static_cast<int>(u))).count();
    if (c >= best) {
      best = c;
      pivot = u;
    }
  }
  auto candidates = p - g.neighbours(static_cast<int>(pivot));
  for (auto v = candidates.find_first(); v != boost::dynamic_bitset<>::npos; v = candidates.find_next(v)) {
    const auto& nv = g.neighbours(static_cast<int>(v));
    auto r2 = r;
    r2.set(v);
    bron_kerbosch(g, r2, p & nv, x & nv, out);
    p.reset(v);
    x.set(v);
  }
}

}  // namespace detail

/// Inclusion-maximal cliques, sorted by size and then lexicographically.
/// Isolated vertices come out as singletons.
inline CliqueList maximal_cliques(const Graph& g) {
  CliqueList out;
  if (g.d() == 0) return out;
  const auto n = static_cast<std::size_t>(g.d());
  boost::dynamic_bitset<> r(n), p(n), x(n);
  p.set();
  detail::bron_kerbosch(g, r, p, x, out);
  std::sort(out.begin(), out.end(), clique_order);
  return out;
}

struct ChordalityResult {
  bool chordal = false;
  /// Perfect elimination ordering (first vertex eliminated first); empty when not chordal.
  std::vector<int> elimination_order;
};

/// Maximum-cardinality search followed by a perfect-elimination check.
inline ChordalityResult is_chordal(const Graph& g) {
  const int d = g.d();
  std::vector<int> weight(d, 0), visit_order;
  std::vector<bool> numbered(d, false);
  for (int step = 0; step < d; ++step) {
    int best = -1;
    for (int v = 0; v < d; ++v)
      if (!numbered[v] && (best < 0 || weight[v] > weight[best])) best = v;
    numbered[best] = true;
    visit_order.push_back(best);
    for (int u = 0; u < d; ++u)
      if (!numbered[u] && g.adjacent(best, u)) ++weight[u];
  }
  // Reverse of the visit order is a perfect elimination ordering iff g is chordal.
  std::vector<int> peo(visit_order.rbegin(), visit_order.rend());
  std::vector<int> pos(d);
  for (int i = 0; i < d; ++i) pos[peo[i]] = i;
  for (int i = 0; i < d; ++i) {
    int v = peo[i];
    // Later neighbours must form a clique; it suffices to check them against the earliest one.
    int first = -1;
    for (int u = 0; u < d; ++u)
      if (g.adjacent(v, u) && pos[u] > i && (first < 0 || pos[u] < pos[first])) first = u;
    if (first < 0) continue;
    for (int u = 0; u < d; ++u)
      if (u != first && g.adjacent(v, u) && pos[u] > i && !g.adjacent(first, u)) return {false, {}};
  }
  return {true, peo};
}

/// Checks that C_i ∩ (C_{i+1} ∪ ... ∪ C_t) lies in some C_j with j > i, for all i < t.
inline bool satisfies_rip(const CliqueList& order) {
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    VertexSet rest;
    for (std::size_t j = i + 1; j < order.size(); ++j) rest = set_union(rest, order[j]);
    VertexSet sep = set_intersection(order[i], rest);
    bool ok = false;
    for (std::size_t j = i + 1; j < order.size() && !ok; ++j) ok = is_subset(sep, order[j]);
    if (!ok) return false;
  }
  return true;
}

struct JunctionTree {
  CliqueList cliques;
  /// Tree edges between clique indices, each with i < j.
  std::vector<std::pair<int, int>> edges;
  std::vector<VertexSet> separators;
  /// Per edge: vertices reachable on the side of edges[k].first / .second, minus the separator.
  std::vector<VertexSet> left, right;
};

inline JunctionTree junction_tree(const Graph& g) {
  if (!is_chordal(g).chordal) fail(ErrorKind::NotChordal, "graph has no junction tree");
  JunctionTree jt;
  jt.cliques = maximal_cliques(g);
  const int t = static_cast<int>(jt.cliques.size());

  // Kruskal on the clique graph; heavier separators first, ties by clique order.
  std::vector<std::tuple<int, int, int>> cand;
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) {
      int w = static_cast<int>(set_intersection(jt.cliques[i], jt.cliques[j]).size());
      if (w > 0) cand.emplace_back(-w, i, j);
    }
  std::sort(cand.begin(), cand.end());
  std::vector<int> parent(t);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [w, i, j] : cand) {
    int a = find(i), b = find(j);
    if (a == b) continue;
    parent[a] = b;
    jt.edges.emplace_back(i, j);
    jt.separators.push_back(set_intersection(jt.cliques[i], jt.cliques[j]));
  }

  std::vector<std::vector<int>> nbr(t);
  for (auto [i, j] : jt.edges) {
    nbr[i].push_back(j);
    nbr[j].push_back(i);
  }
  for (std::size_t e = 0; e < jt.edges.size(); ++e) {
    auto side = [&](int start, int blocked) {
      VertexSet vs;
      std::vector<bool> seen(t, false);
      seen[start] = seen[blocked] = true;
      std::vector<int> stack{start};
      while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        vs = set_union(vs, jt.cliques[c]);
        for (int n : nbr[c])
          if (!seen[n]) {
            seen[n] = true;
            stack.push_back(n);
          }
      }
      VertexSet out;
      std::set_difference(vs.begin(), vs.end(), jt.separators[e].begin(), jt.separators[e].end(),
                          std::back_inserter(out));
      return out;
    };
    jt.left.push_back(side(jt.edges[e].first, jt.edges[e].second));
    jt.right.push_back(side(jt.edges[e].second, jt.edges[e].first));
  }
  return jt;
}

/// Clique-intersection property on every tree path (components may form a forest).
inline bool satisfies_clique_intersection(const JunctionTree& jt) {
  const int t = static_cast<int>(jt.cliques.size());
  std::vector<std::vector<int>> nbr(t);
  for (auto [i, j] : jt.edges) {
    nbr[i].push_back(j);
    nbr[j].push_back(i);
  }
  for (int a = 0; a < t; ++a) {
    std::vector<int> prev(t, -2);
    prev[a] = -1;
    std::queue<int> q;
    q.push(a);
    while (!q.empty()) {
      int c = q.front();
      q.pop();
      for (int n : nbr[c])
        if (prev[n] == -2) {
          prev[n] = c;
          q.push(n);
        }
    }
    for (int b = a + 1; b < t; ++b) {
      VertexSet inter = set_intersection(jt.cliques[a], jt.cliques[b]);
      if (prev[b] == -2) {
        if (!inter.empty()) return false;
        continue;
      }
      for (int c = b; c != -1; c = prev[c])
        if (!is_subset(inter, jt.cliques[c])) return false;
    }
  }
  return true;
}

/// Maximal cliques ordered so that the running intersection property holds:
/// repeatedly take the smallest-index leaf of the junction forest.
inline CliqueList rip_ordering(const Graph& g) {
  JunctionTree jt = junction_tree(g);
  const int t = static_cast<int>(jt.cliques.size());
  std::vector<int> degree(t, 0);
  std::vector<std::vector<int>> nbr(t);
  for (auto [i, j] : jt.edges) {
    nbr[i].push_back(j);
    nbr[j].push_back(i);
    ++degree[i];
    ++degree[j];
  }
  std::vector<bool> removed(t, false);
  CliqueList order;
  for (int step = 0; step < t; ++step) {
    int pick = -1;
    for (int c = 0; c < t && pick < 0; ++c)
      if (!removed[c] && degree[c] <= 1) pick = c;
    removed[pick] = true;
    order.push_back(jt.cliques[pick]);
    for (int n : nbr[pick])
      if (!removed[n]) --degree[n];
  }
  return order;
}

/// Chordal supergraph by greedy minimum-fill elimination (ties: smallest label).
inline Graph chordal_cover(const Graph& g) {
  Graph h = g;
  const int d = g.d();
  std::vector<bool> gone(d, false);
  for (int step = 0; step < d; ++step) {
    int best = -1;
    std::size_t best_fill = 0;
    for (int v = 0; v < d; ++v) {
      if (gone[v]) continue;
      std::vector<int> nb;
      for (int u = 0; u < d; ++u)
        if (!gone[u] && h.adjacent(v, u)) nb.push_back(u);
      std::size_t fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          if (!h.adjacent(nb[i], nb[j])) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<int> nb;
    for (int u = 0; u < d; ++u)
      if (!gone[u] && h.adjacent(best, u)) nb.push_back(u);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (!h.adjacent(nb[i], nb[j])) h.add_edge(nb[i], nb[j]);
    gone[best] = true;
  }
  return h;
}

/// A ⫫ B | S with {A, B, S} a partition of the vertices.
struct MarkovStatement {
  VertexSet a, b, s;
  friend bool operator==(const MarkovStatement&, const MarkovStatement&) = default;
};

inline constexpr int kMaxMarkovVertices = 16;

/// All partition statements of g, each listed once (min A < min B).
/// `limit` caps the output size; exceeding it raises TooLarge.
inline std::vector<MarkovStatement> markov_statements(const Graph& g,
                                                      std::size_t limit = static_cast<std::size_t>(-1)) {
  const int d = g.d();
  if (d > kMaxMarkovVertices)
    fail(ErrorKind::TooLarge, "markov_statements enumerates 3^d labelings; d = " + std::to_string(d));
  std::vector<MarkovStatement> out;
  std::vector<int> label(d, 0);  // 0 = S, 1 = A, 2 = B
  long total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < d; ++i) {
      label[i] = static_cast<int>(c % 3);
      c /= 3;
    }
    int first_a = -1, first_b = -1;
    for (int i = d - 1; i >= 0; --i) {
      if (label[i] == 1) first_a = i;
      if (label[i] == 2) first_b = i;
    }
    if (first_a < 0 || first_b < 0 || first_a > first_b) continue;
    bool separated = true;
    for (int u = 0; u < d && separated; ++u)
      for (int v = 0; v < d && separated; ++v)
        if (label[u] == 1 && label[v] == 2 && g.adjacent(u, v)) separated = false;
    if (!separated) continue;
    MarkovStatement st;
    for (int i = 0; i < d; ++i) (label[i] == 0 ? st.s : label[i] == 1 ? st.a : st.b).push_back(i);
    if (out.size() >= limit) fail(ErrorKind::TooLarge, "more Markov statements than the requested limit");
    out.push_back(std::move(st));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.a, x.b, x.s) < std::tie(y.a, y.b, y.s);
  });
  return out;
}

/// True when every path from A to B meets S (S removed, BFS from A).
inline bool separates(const Graph& g, const VertexSet& a, const VertexSet& b, const VertexSet& s) {
  std::vector<bool> blocked(g.d(), false), seen(g.d(), false);
  for (int v : s) blocked[v] = true;
  std::queue<int> q;
  for (int v : a) {
    seen[v] = true;
    q.push(v);
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < g.d(); ++v)
      if (g.adjacent(u, v) && !blocked[v] && !seen[v]) {
        seen[v] = true;
        q.push(v);
      }
  }
  for (int v : b)
    if (seen[v]) return false;
  return true;
}

inline std::vector<VertexSet> connected_components(const Graph& g) {
  std::vector<VertexSet> out;
  std::vector<bool> seen(g.d(), false);
  for (int s = 0; s < g.d(); ++s) {
    if (seen[s]) continue;
    VertexSet comp;
    std::queue<int> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      comp.push_back(u);
      for (int v = 0; v < g.d(); ++v)
        if (g.adjacent(u, v) && !seen[v]) {
          seen[v] = true;
          q.push(v);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace lcgm
