#pragma once

// Maximum-likelihood fit of a log-concave density that factorizes over the
// maximal cliques of a graph.

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lcgm/graph.hpp"
#include "lcgm/objective.hpp"
#include "lcgm/refine.hpp"
#include "lcgm/sample.hpp"
#include "lcgm/support.hpp"
#include "lcgm/tent.hpp"

namespace lcgm {

struct SampleSizeCheck {
  bool pass = false;            // n >= largest maximal clique + 1
  std::size_t required = 0;
  std::size_t max_clique = 0;
  bool chordal = false;
  std::size_t cover_required = 0;  // bound from a chordal cover (equals `required` for chordal graphs)
  bool cover_pass = false;
  std::vector<std::string> warnings;
};

inline SampleSizeCheck check_sample_size(const Graph& g, std::size_t n) {
  SampleSizeCheck r;
  for (const auto& c : maximal_cliques(g)) r.max_clique = std::max(r.max_clique, c.size());
  r.required = r.max_clique + 1;
  r.pass = n >= r.required;
  r.chordal = is_chordal(g).chordal;
  if (r.chordal) {
    r.cover_required = r.required;
  } else {
    std::size_t cover_clique = 0;
    for (const auto& c : maximal_cliques(chordal_cover(g))) cover_clique = std::max(cover_clique, c.size());
    r.cover_required = cover_clique + 1;
    r.warnings.push_back("graph is not chordal; existence and uniqueness are not guaranteed");
  }
  r.cover_pass = n >= r.cover_required;
  if (!r.cover_pass)
    r.warnings.push_back("n = " + std::to_string(n) + " is below the chordal-cover bound " +
                         std::to_string(r.cover_required) + "; the support may be lower-dimensional");
  return r;
}

struct FitOptions {
  double gtol = 1e-6;
  std::size_t max_iter = 10000;
  unsigned threads = 1;
  bool product_fast_path = true;
  /// Perturb the uniform start with N(0, init_noise) noise drawn from this seed.
  std::optional<std::uint64_t> random_init_seed;
  double init_noise = 0.5;
};

struct OptimizerTrace {
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string stop_reason;
  double grad_norm = 0;  // sup-norm of the final supergradient
  std::vector<double> tau_history;
};

struct MLEResult {
  Graph graph;
  Sample sample;
  CliqueList cliques;
  /// heights[c][i] = y_C^(i) after normalization.
  std::vector<std::vector<double>> heights;
  std::vector<TentFunction> tents;  // clique tents of log f
  double loglik = 0;
  double tau = 0;
  double integral_before = 0;  // integral of the optimizer's density before rescaling
  double integral_after = 0;
  Polytope support;
  Rational support_volume;
  OptimizerTrace trace;
  std::vector<VertexSet> components;       // connected components (one entry if connected)
  std::vector<MLEResult> component_results;  // filled by the product path

  double log_density(const RPoint& x) const {
    double s = 0;
    for (std::size_t c = 0; c < cliques.size(); ++c) {
      RPoint xc;
      for (int v : cliques[c]) xc.push_back(x[v]);
      auto h = tents[c].eval(xc);
      if (!h) return -std::numeric_limits<double>::infinity();
      s += h->get_d();
    }
    return s;
  }

  double log_density(const std::vector<double>& x) const {
    RPoint r;
    for (double v : x) r.push_back(from_double(v));
    return log_density(r);
  }

  template <class P>
  double density(const P& x) const {
    double l = log_density(x);
    return std::isinf(l) ? 0.0 : std::exp(l);
  }

  RefinedComplex refined() const { return refine_subdivisions(graph, tents, support); }
};

inline double density_eval(const MLEResult& r, const std::vector<double>& x) { return r.density(x); }
inline double density_eval(const MLEResult& r, const RPoint& x) { return r.density(x); }

/// sum_i w_i log f(X^(i)) for a fitted density; -inf if some point has zero density.
inline double loglik(const MLEResult& r, const Sample& x) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.weights[i].get_d() * r.log_density(x.points[i]);
  return s;
}

namespace detail {

inline double sup_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// BFGS ascent on tau with Armijo backtracking; the inverse Hessian is reset to
/// a scaled identity whenever the line search fails. When progress stalls at a
/// kink (coplanar lifted sites make the selected supergradient useless) the
/// heights get a small deterministic kick and the run restarts; it ends once a
/// kicked run fails to beat the best value so far.
inline std::vector<double> maximize_tau(Objective& obj, std::vector<double> y, const FitOptions& opt,
                                        OptimizerTrace& trace) {
  const std::size_t n = y.size();
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  constexpr std::size_t kStallWindow = 5;
  constexpr double kRelTol = 1e-10;
  constexpr int kMaxKicks = 8;
  constexpr double kKickScale = 1e-3;

  auto cur = obj.evaluate(y);
  ++trace.evaluations;
  trace.tau_history.push_back(cur.tau);
  std::vector<double> best_y = y;
  Objective::Value best = cur;
  int kicks = 0;
  std::size_t window_start = 0;  // stall detection ignores history before the last kick
  std::vector<double> H(n * n, 0.0);
  auto reset = [&](double scale) {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = scale;
  };
  reset(1.0);
  bool fresh = true;
  std::vector<double> p(n), y_new(n), s(n), d(n), Hd(n);

  // Returns true when the run is over (y and cur then hold the best iterate).
  auto stalled = [&](const char* reason) {
    const bool improved = cur.tau > best.tau + kRelTol * std::max(1.0, std::abs(best.tau));
    if (improved || kicks == 0) {
      if (cur.tau > best.tau) {
        best_y = y;
        best = cur;
      }
      if (kicks < kMaxKicks) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(kicks));
        std::normal_distribution<double> nd(0.0, kKickScale);
        y = best_y;
        for (auto& v : y) v += nd(rng);
        ++kicks;
        cur = obj.evaluate(y);
        ++trace.evaluations;
        trace.tau_history.push_back(cur.tau);
        window_start = trace.tau_history.size();
        reset(1.0);
        fresh = true;
        return false;
      }
    }
    if (best.tau > cur.tau) {
      y = best_y;
      cur = best;
    }
    trace.grad_norm = sup_norm(cur.grad);
    trace.converged = true;
    trace.stop_reason = reason;
    return true;
  };

  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    trace.grad_norm = sup_norm(cur.grad);
    if (trace.grad_norm < opt.gtol) {
      trace.converged = true;
      trace.stop_reason = "gradient below tolerance";
      return y;
    }
    // Ascent direction p = H g.
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * cur.grad[j];
      p[i] = acc;
    }
    double slope = 0;
    for (std::size_t i = 0; i < n; ++i) slope += p[i] * cur.grad[i];
    if (!(slope > 0)) {
      reset(1.0);
      fresh = true;
      p = cur.grad;
      slope = 0;
      for (double g : cur.grad) slope += g * g;
    }
    if (fresh) {
      // Keep the first step of a fresh model moderate.
      double m = sup_norm(p);
      if (m > 1.0) {
        for (auto& v : p) v /= m;
        slope /= m;
      }
    }

    double alpha = 1.0;
    bool accepted = false;
    Objective::Value next;
    for (int k = 0; k < kMaxHalvings; ++k) {
      for (std::size_t i = 0; i < n; ++i) y_new[i] = y[i] + alpha * p[i];
      next = obj.evaluate(y_new, false);
      ++trace.evaluations;
      if (next.tau >= cur.tau + kArmijo * alpha * slope) {
        accepted = true;
        next = obj.evaluate(y_new);
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        reset(1.0);
        fresh = true;
        continue;
      }
      if (stalled("no ascent along the supergradient")) return y;
      continue;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = y_new[i] - y[i];
      d[i] = cur.grad[i] - next.grad[i];  // gradient change of -tau
    }
    double sd = 0, dd = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sd += s[i] * d[i];
      dd += d[i] * d[i];
      ss += s[i] * s[i];
    }
    if (sd > 1e-12 * std::sqrt(ss * dd)) {
      if (fresh) reset(sd / dd);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * d[j];
        Hd[i] = acc;
      }
      double dHd = 0;
      for (std::size_t i = 0; i < n; ++i) dHd += d[i] * Hd[i];
      const double rho = 1.0 / sd;
      const double c = (1.0 + rho * dHd) * rho;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          H[i * n + j] += c * s[i] * s[j] - rho * (Hd[i] * s[j] + s[i] * Hd[j]);
      fresh = false;
    }

    y.swap(y_new);
    cur = std::move(next);
    trace.iterations = it + 1;
    trace.tau_history.push_back(cur.tau);
    const auto& h = trace.tau_history;
    if (h.size() > window_start + kStallWindow) {
      double then = h[h.size() - 1 - kStallWindow];
      if (std::abs(cur.tau - then) <= kRelTol * std::max(1.0, std::abs(cur.tau)) &&
          stalled("relative change in tau below tolerance"))
        return y;
    }
  }
  if (best.tau > cur.tau) {
    y = best_y;
    cur = best;
  }
  trace.grad_norm = sup_norm(cur.grad);
  trace.converged = false;
  trace.stop_reason = "iteration limit reached";
  return y;
}

inline MLEResult fit_connected(const Graph& g, const Sample& x, const FitOptions& opt) {
  ObjectiveOptions oo;
  oo.threads = opt.threads;
  Objective obj = [&] {
    try {
      return Objective(g, x, oo);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::LowerDimensionalSupport) fail(ErrorKind::DegenerateSupport, e.what());
      throw;
    }
  }();

  std::vector<double> y = obj.uniform_heights();
  if (opt.random_init_seed) {
    std::mt19937_64 rng(*opt.random_init_seed);
    std::normal_distribution<double> nd(0.0, opt.init_noise);
    for (auto& v : y) v += nd(rng);
  }

  MLEResult r;
  y = maximize_tau(obj, std::move(y), opt, r.trace);

  r.integral_before = obj.integral(y);
  const double shift = -std::log(r.integral_before);
  for (std::size_t s = 0; s < obj.num_sites(0); ++s) y[obj.offset(0) + s] += shift;
  auto fin = obj.evaluate(y);
  r.integral_after = fin.integral;
  r.tau = fin.tau;
  r.loglik = obj.loglik(y);

  r.graph = g;
  r.sample = x;
  r.cliques = obj.cliques();
  r.heights = obj.expand(y);
  r.tents = obj.tents(y);
  r.support = obj.support();
  r.support_volume = obj.support_volume();
  r.components = {[&] {
    VertexSet all;
    for (int v = 0; v < g.d(); ++v) all.push_back(v);
    return all;
  }()};
  return r;
}

}  // namespace detail

inline MLEResult fit(const Graph& g, const Sample& x, const FitOptions& opt = {}) {
  x.validate();
  if (static_cast<std::size_t>(g.d()) != x.dim) fail(ErrorKind::DimensionMismatch, "graph and sample dimensions differ");
  const std::size_t distinct = x.merged_duplicates().size();
  auto check = check_sample_size(g, distinct);
  if (!check.pass)
    fail(ErrorKind::InsufficientSample, "need at least " + std::to_string(check.required) +
                                            " distinct sample points, got " + std::to_string(distinct));

  auto comps = connected_components(g);
  if (!opt.product_fast_path || comps.size() == 1) {
    auto r = detail::fit_connected(g, x, opt);
    r.components = comps;
    return r;
  }

  // Independent component fits; the joint density is their product.
  std::vector<std::future<MLEResult>> jobs;
  FitOptions sub = opt;
  if (opt.threads > 1) sub.threads = 1;
  for (const auto& comp : comps) {
    auto task = [&g, &x, comp, sub] {
      Sample xs;
      xs.dim = comp.size();
      xs.points = x.projected(comp);
      xs.weights = x.weights;
      return detail::fit_connected(g.induced(comp), xs, sub);
    };
    jobs.push_back(std::async(opt.threads > 1 ? std::launch::async : std::launch::deferred, task));
  }

  MLEResult r;
  r.graph = g;
  r.sample = x;
  r.components = comps;
  r.cliques = maximal_cliques(g);
  r.heights.resize(r.cliques.size());
  r.tents.resize(r.cliques.size());
  r.integral_before = 1;
  r.integral_after = 1;
  r.trace.converged = true;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    MLEResult part = jobs[k].get();
    for (std::size_t c = 0; c < part.cliques.size(); ++c) {
      VertexSet global;
      for (int v : part.cliques[c]) global.push_back(comps[k][v]);
      auto at = std::find(r.cliques.begin(), r.cliques.end(), global);
      const auto slot = static_cast<std::size_t>(at - r.cliques.begin());
      r.heights[slot] = part.heights[c];
      r.tents[slot] = part.tents[c];
    }
    r.loglik += part.loglik;
    r.integral_before *= part.integral_before;
    r.integral_after *= part.integral_after;
    r.trace.iterations += part.trace.iterations;
    r.trace.evaluations += part.trace.evaluations;
    r.trace.converged = r.trace.converged && part.trace.converged;
    r.trace.grad_norm = std::max(r.trace.grad_norm, part.trace.grad_norm);
    r.component_results.push_back(std::move(part));
  }
  r.trace.stop_reason = r.trace.converged ? "all components converged" : "a component did not converge";
  // tau = sum_i w_i sum_C y_C^(i) - integral; the linear part is additive over components.
  double linear = 0;
  for (const auto& part : r.component_results) linear += part.tau + part.integral_after;
  r.tau = linear - r.integral_after;
  r.support = support_polytope(g, x);
  r.support_volume = r.support.volume();
  return r;
}

}  // namespace lcgm
