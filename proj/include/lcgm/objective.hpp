#pragma once

// The finite-dimensional objective tau over clique heights and a supergradient.
//
// Each clique tent is triangulated (pulling triangulation of its regular
// subdivision); the common refinement of the preimages of those simplices tiles
// the support. On that refinement the log-density is affine, so the integral and
// its derivatives reduce to simplex divided differences. The triangulated
// interpolant is a minorant of the tent that agrees with it at the current
// heights, so its gradient is a valid supergradient of tau.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include "lcgm/detail/linalg.hpp"
#include "lcgm/graph.hpp"
#include "lcgm/integrate.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/sample.hpp"
#include "lcgm/support.hpp"
#include "lcgm/tent.hpp"

namespace lcgm {

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Geometry of one refined cell: its simplices, their volumes and, per vertex and
/// clique, the barycentric weights of the projected vertex in the clique simplex.
struct CellGeometry {
  bool empty = true;
  std::size_t stride = 0;  // sum over cliques of |C|+1
  std::vector<double> volumes;
  std::vector<double> bary;  // [simplex][vertex][clique block]
};

/// Exact data of one clique simplex: barycentric coordinates are
/// lambda_{1..k}(x) = inv (x - origin), lambda_0 = 1 - sum; `ineqs` are
/// lambda >= 0 lifted to R^d.
struct SimplexFrame {
  RPoint origin;
  RMatrix inv;
  std::vector<Halfspace> ineqs;
};

}  // namespace detail

struct ObjectiveOptions {
  unsigned threads = 1;
  /// Treat coincident projected sample points in a clique as one site with summed weight.
  bool merge_coincident_sites = true;
};

class Objective {
 public:
  Objective(const Graph& g, const Sample& x, ObjectiveOptions opt = {})
      : graph_(g), sample_(x), opt_(opt) {
    sample_.validate();
    if (static_cast<std::size_t>(g.d()) != x.dim) fail(ErrorKind::DimensionMismatch, "graph and sample dimensions differ");
    d_ = x.dim;
    cliques_ = maximal_cliques(g);
    support_ = support_polytope(g, x);
    if (!support_.full_dimensional())
      fail(ErrorKind::LowerDimensionalSupport, "support polytope is not full-dimensional");
    support_volume_ = support_.volume();

    const std::size_t t = cliques_.size();
    sites_.resize(t);
    site_weight_.resize(t);
    site_of_.resize(t);
    offset_.resize(t);
    std::size_t total = 0;
    for (std::size_t c = 0; c < t; ++c) {
      auto proj = sample_.projected(cliques_[c]);
      std::map<RPoint, std::size_t> seen;
      for (std::size_t i = 0; i < proj.size(); ++i) {
        std::size_t s = sites_[c].size();
        if (opt_.merge_coincident_sites) {
          auto [it, fresh] = seen.emplace(proj[i], s);
          if (!fresh) {
            site_of_[c].push_back(it->second);
            site_weight_[c][it->second] += sample_.weights[i].get_d();
            continue;
          }
        }
        site_of_[c].push_back(s);
        sites_[c].push_back(proj[i]);
        site_weight_[c].push_back(sample_.weights[i].get_d());
      }
      offset_[c] = total;
      total += sites_[c].size();
    }
    nvar_ = total;
    order_ = traversal_order();
    frames_.resize(t);
  }

  const Graph& graph() const { return graph_; }
  const Sample& sample() const { return sample_; }
  const CliqueList& cliques() const { return cliques_; }
  const Polytope& support() const { return support_; }
  const Rational& support_volume() const { return support_volume_; }
  std::size_t num_variables() const { return nvar_; }
  std::size_t num_sites(std::size_t c) const { return sites_[c].size(); }
  std::size_t offset(std::size_t c) const { return offset_[c]; }
  const std::vector<RPoint>& sites(std::size_t c) const { return sites_[c]; }
  const std::vector<double>& site_weights(std::size_t c) const { return site_weight_[c]; }

  /// Heights of the uniform density on the support, split evenly across cliques.
  std::vector<double> uniform_heights() const {
    double v = -std::log(support_volume_.get_d()) / static_cast<double>(cliques_.size());
    return std::vector<double>(nvar_, v);
  }

  /// Per-clique heights indexed by sample point (y_C^{(i)}).
  std::vector<std::vector<double>> expand(const std::vector<double>& y) const {
    std::vector<std::vector<double>> out(cliques_.size());
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      for (std::size_t i = 0; i < sample_.size(); ++i) out[c].push_back(y[offset_[c] + site_of_[c][i]]);
    return out;
  }

  /// Inverse of expand; coincident sites take the largest of their heights.
  std::vector<double> reduce(const std::vector<std::vector<double>>& per_point) const {
    std::vector<double> y(nvar_, -std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      for (std::size_t i = 0; i < sample_.size(); ++i) {
        double& slot = y[offset_[c] + site_of_[c][i]];
        slot = std::max(slot, per_point[c][i]);
      }
    return y;
  }

  TentFunction tent(std::size_t c, const std::vector<double>& y) const {
    std::vector<double> h(y.begin() + static_cast<std::ptrdiff_t>(offset_[c]),
                          y.begin() + static_cast<std::ptrdiff_t>(offset_[c] + sites_[c].size()));
    return TentFunction::from_doubles(sites_[c], h);
  }

  std::vector<TentFunction> tents(const std::vector<double>& y) const {
    check(y);
    std::vector<TentFunction> out;
    for (std::size_t c = 0; c < cliques_.size(); ++c) out.push_back(tent(c, y));
    return out;
  }

  /// Clique triangulations; equal signatures mean the same affine pieces.
  std::vector<std::vector<std::vector<std::size_t>>> signature(const std::vector<double>& y) const {
    std::vector<std::vector<std::vector<std::size_t>>> out;
    for (const auto& t : tents(y)) out.push_back(t.triangulation());
    return out;
  }

  struct Value {
    double tau = 0;
    double integral = 0;
    double linear = 0;          // sum of w_i y_C^(i)
    std::vector<double> grad;   // supergradient of tau (empty unless requested)
    std::size_t simplices = 0;  // refined simplices integrated
  };

  Value evaluate(const std::vector<double>& y, bool want_grad = true) {
    check(y);
    Value out;
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      for (std::size_t s = 0; s < sites_[c].size(); ++s) out.linear += site_weight_[c][s] * y[offset_[c] + s];

    auto pieces = collect(y);
    // Flatten refined simplices: (piece, simplex index).
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t p = 0; p < pieces.size(); ++p)
      for (std::size_t s = 0; s < pieces[p].geom->volumes.size(); ++s) work.emplace_back(p, s);
    out.simplices = work.size();

    const std::size_t vtx = d_ + 1;
    std::vector<double> integrals(work.size());
    std::vector<double> moments(want_grad ? work.size() * vtx : 0);
    auto run = [&](std::size_t lo, std::size_t hi) {
      std::vector<double> vals(vtx);
      for (std::size_t w = lo; w < hi; ++w) {
        const auto& piece = pieces[work[w].first];
        const auto& g = *piece.geom;
        const double* b = g.bary.data() + work[w].second * vtx * g.stride;
        for (std::size_t j = 0; j < vtx; ++j) {
          double v = 0;
          const double* bj = b + j * g.stride;
          for (std::size_t q = 0; q < g.stride; ++q) v += bj[q] * y[piece.vars[q]];
          vals[j] = v;
        }
        if (!want_grad) {
          integrals[w] = exp_integral_from_volume(g.volumes[work[w].second], vals);
          continue;
        }
        auto r = exp_simplex_from_volume(g.volumes[work[w].second], vals);
        integrals[w] = r.integral;
        for (std::size_t j = 0; j < vtx; ++j) moments[w * vtx + j] = r.moments[j];
      }
    };
    parallel_for(work.size(), run);

    out.integral = detail::pairwise_sum(integrals.data(), integrals.size());
    out.tau = out.linear - out.integral;
    if (want_grad) {
      out.grad.assign(nvar_, 0.0);
      for (std::size_t c = 0; c < cliques_.size(); ++c)
        for (std::size_t s = 0; s < sites_[c].size(); ++s) out.grad[offset_[c] + s] = site_weight_[c][s];
      for (std::size_t w = 0; w < work.size(); ++w) {
        const auto& piece = pieces[work[w].first];
        const auto& g = *piece.geom;
        const double* b = g.bary.data() + work[w].second * vtx * g.stride;
        for (std::size_t j = 0; j < vtx; ++j) {
          const double m = moments[w * vtx + j];
          const double* bj = b + j * g.stride;
          for (std::size_t q = 0; q < g.stride; ++q)
            if (bj[q] != 0.0) out.grad[piece.vars[q]] -= m * bj[q];
        }
      }
    }
    return out;
  }

  double integral(const std::vector<double>& y) { return evaluate(y, false).integral; }

  /// sum_i w_i sum_C h_C(X_C^(i)), from exact tent evaluation at the sample points.
  double loglik(const std::vector<double>& y) const {
    auto ts = tents(y);
    double total = 0;
    for (std::size_t i = 0; i < sample_.size(); ++i) {
      double v = 0;
      for (std::size_t c = 0; c < cliques_.size(); ++c) {
        auto h = ts[c].eval(sites_[c][site_of_[c][i]]);
        if (!h) return -std::numeric_limits<double>::infinity();
        v += h->get_d();
      }
      total += sample_.weights[i].get_d() * v;
    }
    return total;
  }

  std::size_t cache_size() const { return cache_.size(); }
  void set_threads(unsigned n) { opt_.threads = std::max(1u, n); }

 private:
  struct Piece {
    std::shared_ptr<const detail::CellGeometry> geom;
    std::vector<std::size_t> vars;  // variable index for each barycentric slot
  };

  struct CliqueSimplex {
    std::vector<std::size_t> sites;
    std::shared_ptr<const detail::SimplexFrame> frame;
    std::vector<const Rational*> lo, hi;  // bounding box per clique coordinate
    std::vector<double> lo_d, hi_d;
  };

  void check(const std::vector<double>& y) const {
    if (y.size() != nvar_) fail(ErrorKind::DimensionMismatch, "height vector has the wrong length");
    for (double v : y)
      if (!std::isfinite(v)) fail(ErrorKind::ValidationError, "heights must be finite");
  }

  template <class F>
  void parallel_for(std::size_t n, F&& f) const {
    const unsigned th = std::max(1u, opt_.threads);
    if (th == 1 || n < 64) {
      f(0, n);
      return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + th - 1) / th;
    for (unsigned t = 0; t < th; ++t) {
      std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (auto& p : pool) p.join();
  }

  /// Clique order for the tuple search: each next clique overlaps the previous ones most.
  std::vector<std::size_t> traversal_order() const {
    const std::size_t t = cliques_.size();
    std::vector<std::size_t> order;
    std::vector<bool> used(t, false);
    VertexSet covered;
    for (std::size_t step = 0; step < t; ++step) {
      std::size_t best = t;
      std::size_t best_overlap = 0;
      for (std::size_t c = 0; c < t; ++c) {
        if (used[c]) continue;
        std::size_t ov = set_intersection(cliques_[c], covered).size();
        if (best == t || ov > best_overlap || (ov == best_overlap && cliques_[c].size() > cliques_[best].size())) {
          best = c;
          best_overlap = ov;
        }
      }
      used[best] = true;
      order.push_back(best);
      covered = set_union(covered, cliques_[best]);
    }
    return order;
  }

  std::vector<Piece> collect(const std::vector<double>& y) {
    const std::size_t t = cliques_.size();
    std::vector<std::vector<CliqueSimplex>> simplices(t);
    for (std::size_t c = 0; c < t; ++c) {
      for (auto& s : tent(c, y).triangulation()) {
        CliqueSimplex cs;
        const std::size_t k = cliques_[c].size();
        cs.lo.assign(k, nullptr);
        cs.hi.assign(k, nullptr);
        for (auto i : s)
          for (std::size_t j = 0; j < k; ++j) {
            const Rational& v = sites_[c][i][j];
            if (!cs.lo[j] || v < *cs.lo[j]) cs.lo[j] = &v;
            if (!cs.hi[j] || v > *cs.hi[j]) cs.hi[j] = &v;
          }
        for (std::size_t j = 0; j < k; ++j) {
          cs.lo_d.push_back(cs.lo[j]->get_d());
          cs.hi_d.push_back(cs.hi[j]->get_d());
        }
        cs.frame = frame(c, s);
        cs.sites = std::move(s);
        simplices[c].push_back(std::move(cs));
      }
    }

    std::vector<Piece> pieces;
    std::vector<const CliqueSimplex*> chosen(t, nullptr);
    std::vector<const Rational*> lo(d_, nullptr), hi(d_, nullptr);
    std::vector<double> lo_d(d_, -HUGE_VAL), hi_d(d_, HUGE_VAL);

    auto recurse = [&](auto&& self, std::size_t level) -> void {
      if (level == t) {
        pieces.push_back(make_piece(chosen));
        if (pieces.back().geom->empty) pieces.pop_back();
        return;
      }
      const std::size_t c = order_[level];
      const auto& clique = cliques_[c];
      for (const auto& s : simplices[c]) {
        auto save_lo = lo, save_hi = hi;
        auto save_lo_d = lo_d, save_hi_d = hi_d;
        bool ok = true;
        for (std::size_t j = 0; j < clique.size() && ok; ++j) {
          const int v = clique[j];
          if (s.lo_d[j] > lo_d[v] || (s.lo_d[j] == lo_d[v] && lo[v] && *s.lo[j] > *lo[v])) {
            lo[v] = s.lo[j];
            lo_d[v] = s.lo_d[j];
          }
          if (s.hi_d[j] < hi_d[v] || (s.hi_d[j] == hi_d[v] && hi[v] && *s.hi[j] < *hi[v])) {
            hi[v] = s.hi[j];
            hi_d[v] = s.hi_d[j];
          }
          if (lo_d[v] > hi_d[v]) ok = false;
          else if (lo_d[v] == hi_d[v]) ok = *lo[v] < *hi[v];
        }
        if (ok) {
          chosen[c] = &s;
          self(self, level + 1);
        }
        lo = std::move(save_lo);
        hi = std::move(save_hi);
        lo_d = std::move(save_lo_d);
        hi_d = std::move(save_hi_d);
      }
    };
    recurse(recurse, 0);
    return pieces;
  }

  Piece make_piece(const std::vector<const CliqueSimplex*>& chosen) {
    std::vector<std::uint32_t> key;
    Piece piece;
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      for (auto i : chosen[c]->sites) {
        key.push_back(static_cast<std::uint32_t>(i));
        piece.vars.push_back(offset_[c] + i);
      }
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(std::move(key), build_geometry(chosen)).first;
    piece.geom = it->second;
    return piece;
  }

  std::shared_ptr<const detail::SimplexFrame> frame(std::size_t c, const std::vector<std::size_t>& simplex) {
    std::vector<std::uint32_t> key(simplex.begin(), simplex.end());
    auto& cache = frames_[c];
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const auto& clique = cliques_[c];
    const std::size_t k = clique.size();
    auto f = std::make_shared<detail::SimplexFrame>();
    f->origin = sites_[c][simplex[0]];
    detail::RMatrix m(k, std::vector<Rational>(k));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t q = 0; q < k; ++q) m[r][q] = sites_[c][simplex[q + 1]][r] - f->origin[r];
    f->inv.assign(k, std::vector<Rational>(k));
    for (std::size_t col = 0; col < k; ++col) {
      std::vector<Rational> e(k, Rational(0)), x;
      e[col] = 1;
      if (!detail::solve(m, e, x)) fail(ErrorKind::DegenerateSimplex, "clique simplex is degenerate");
      for (std::size_t r = 0; r < k; ++r) f->inv[r][col] = x[r];
    }
    // lambda_j >= 0 reads -inv_j . x <= -inv_j . origin; lambda_0 >= 0 reads sum_j inv_j . x <= 1 + sum_j inv_j . origin.
    Halfspace first{std::vector<Rational>(d_, Rational(0)), Rational(1)};
    for (std::size_t j = 0; j < k; ++j) {
      Halfspace h{std::vector<Rational>(d_, Rational(0)), Rational(0)};
      for (std::size_t r = 0; r < k; ++r) {
        h.a[clique[r]] = -f->inv[j][r];
        h.b -= f->inv[j][r] * f->origin[r];
        first.a[clique[r]] += f->inv[j][r];
      }
      first.b -= h.b;
      f->ineqs.push_back(std::move(h));
    }
    f->ineqs.push_back(std::move(first));
    cache.emplace(std::move(key), f);
    return f;
  }

  std::shared_ptr<const detail::CellGeometry> build_geometry(const std::vector<const CliqueSimplex*>& chosen) const {
    auto geom = std::make_shared<detail::CellGeometry>();
    std::vector<Halfspace> ineqs;
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      ineqs.insert(ineqs.end(), chosen[c]->frame->ineqs.begin(), chosen[c]->frame->ineqs.end());
    Polytope cell = Polytope::from_constraints(d_, ineqs);
    if (!cell.full_dimensional()) return geom;
    geom->empty = false;
    std::size_t stride = 0;
    for (const auto& c : cliques_) stride += c.size() + 1;
    geom->stride = stride;

    // Barycentric weights of every cell vertex in each clique simplex.
    std::vector<std::vector<double>> vb(cell.vertices().size(), std::vector<double>(stride));
    std::vector<Rational> diff;
    for (std::size_t v = 0; v < cell.vertices().size(); ++v) {
      std::size_t pos = 0;
      for (std::size_t c = 0; c < cliques_.size(); ++c) {
        const auto& clique = cliques_[c];
        const auto& f = *chosen[c]->frame;
        const std::size_t k = clique.size();
        diff.resize(k);
        for (std::size_t r = 0; r < k; ++r) diff[r] = cell.vertices()[v][clique[r]] - f.origin[r];
        Rational first = 1;
        for (std::size_t j = 0; j < k; ++j) {
          Rational lam = 0;
          for (std::size_t r = 0; r < k; ++r) lam += f.inv[j][r] * diff[r];
          first -= lam;
          vb[v][pos + 1 + j] = lam.get_d();
        }
        vb[v][pos] = first.get_d();
        pos += k + 1;
      }
    }
    for (const auto& s : cell.triangulate()) {
      geom->volumes.push_back(cell.simplex_volume(s).get_d());
      for (auto v : s) geom->bary.insert(geom->bary.end(), vb[v].begin(), vb[v].end());
    }
    return geom;
  }

  Graph graph_;
  Sample sample_;
  ObjectiveOptions opt_;
  std::size_t d_ = 0;
  CliqueList cliques_;
  Polytope support_;
  Rational support_volume_;
  std::vector<std::vector<RPoint>> sites_;
  std::vector<std::vector<double>> site_weight_;
  std::vector<std::vector<std::size_t>> site_of_;
  std::vector<std::size_t> offset_;
  std::size_t nvar_ = 0;
  std::vector<std::size_t> order_;
  std::unordered_map<std::vector<std::uint32_t>, std::shared_ptr<const detail::CellGeometry>, detail::KeyHash> cache_;
  std::vector<std::unordered_map<std::vector<std::uint32_t>, std::shared_ptr<const detail::SimplexFrame>, detail::KeyHash>>
      frames_;
};

/// tau and a supergradient for a full assignment y_C^(i) (one height per clique and sample point).
inline Objective::Value objective_and_subgradient(const Graph& g, const Sample& x,
                                                  const std::vector<std::vector<double>>& heights) {
  Objective obj(g, x, ObjectiveOptions{1, false});
  std::vector<double> y;
  for (const auto& h : heights) {
    if (h.size() != x.size()) fail(ErrorKind::DimensionMismatch, "one height per sample point and clique");
    y.insert(y.end(), h.begin(), h.end());
  }
  if (heights.size() != obj.cliques().size()) fail(ErrorKind::DimensionMismatch, "one height vector per clique");
  return obj.evaluate(y, true);
}

}  // namespace lcgm
