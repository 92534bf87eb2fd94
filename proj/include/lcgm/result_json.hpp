#pragma once

// MLEResult to and from JSON. Heights are stored as doubles (shortest round-trip
// form), so a reloaded result evaluates to the same bits.

#include <string>
#include <vector>

#include "lcgm/io.hpp"
#include "lcgm/mle.hpp"

namespace lcgm::io {

inline json sample_json(const Sample& x) {
  json pts = json::array(), w = json::array();
  for (const auto& p : x.points) pts.push_back(point_json(p));
  for (const auto& v : x.weights) w.push_back(rational_json(v));
  return {{"dim", x.dim}, {"points", pts}, {"weights", w}};
}

inline Sample sample_from_json(const json& j) {
  try {
    Sample s;
    s.dim = j.at("dim").get<std::size_t>();
    for (const auto& p : j.at("points")) {
      RPoint q;
      for (const auto& x : p) q.push_back(rational_from_json(x));
      s.points.push_back(std::move(q));
    }
    for (const auto& w : j.at("weights")) s.weights.push_back(rational_from_json(w));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("sample JSON: ") + e.what());
  }
}

inline json trace_json(const OptimizerTrace& t) {
  return {{"iterations", t.iterations},   {"evaluations", t.evaluations}, {"converged", t.converged},
          {"stop_reason", t.stop_reason}, {"grad_norm", t.grad_norm}};
}

inline json result_json(const MLEResult& r) {
  json cliques = json::array();
  for (std::size_t c = 0; c < r.cliques.size(); ++c) {
    json poles = json::array();
    const auto& t = r.tents[c];
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.active(i)) poles.push_back({{"site", point_json(t.sites()[i])}, {"height", t.heights()[i].get_d()}});
    cliques.push_back({{"vertices", vertex_set_json(r.cliques[c])}, {"heights", r.heights[c]}, {"tent_poles", poles}});
  }
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(vertex_set_json(c));
  return {{"graph", graph_json(r.graph)},
          {"sample", sample_json(r.sample)},
          {"cliques", cliques},
          {"components", comps},
          {"loglik", r.loglik},
          {"tau", r.tau},
          {"integral_before_rescale", r.integral_before},
          {"integral", r.integral_after},
          {"support", polytope_json(r.support)},
          {"support_volume", rational_json(r.support_volume)},
          {"optimizer", trace_json(r.trace)}};
}

/// Rebuilds the fitted density (tents, support, scalars) from result_json output.
inline MLEResult result_from_json(const json& j) {
  try {
    MLEResult r;
    r.graph = graph_from_json(j.at("graph"));
    r.sample = sample_from_json(j.at("sample"));
    if (r.sample.dim != static_cast<std::size_t>(r.graph.d()))
      fail(ErrorKind::DimensionMismatch, "result graph and sample dimensions differ");
    for (const auto& c : j.at("cliques")) {
      VertexSet vs;
      for (const auto& v : c.at("vertices")) vs.push_back(v.get<int>() - 1);
      auto h = c.at("heights").get<std::vector<double>>();
      if (h.size() != r.sample.size()) fail(ErrorKind::DimensionMismatch, "one height per sample point expected");
      r.tents.push_back(TentFunction::from_doubles(r.sample.projected(vs), h));
      r.cliques.push_back(std::move(vs));
      r.heights.push_back(std::move(h));
    }
    if (j.contains("components"))
      for (const auto& c : j.at("components")) {
        VertexSet vs;
        for (const auto& v : c) vs.push_back(v.get<int>() - 1);
        r.components.push_back(std::move(vs));
      }
    r.loglik = j.at("loglik").get<double>();
    r.tau = j.at("tau").get<double>();
    r.integral_before = j.at("integral_before_rescale").get<double>();
    r.integral_after = j.at("integral").get<double>();
    r.support = polytope_from_json(j.at("support"));
    r.support_volume = rational_from_json(j.at("support_volume"));
    const auto& t = j.at("optimizer");
    r.trace.iterations = t.at("iterations").get<std::size_t>();
    r.trace.evaluations = t.at("evaluations").get<std::size_t>();
    r.trace.converged = t.at("converged").get<bool>();
    r.trace.stop_reason = t.at("stop_reason").get<std::string>();
    r.trace.grad_norm = t.at("grad_norm").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("result JSON: ") + e.what());
  }
}

}  // namespace lcgm::io
