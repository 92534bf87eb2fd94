#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lcgm/error.hpp"
#include "lcgm/rational.hpp"

namespace lcgm {

/// n weighted points in R^d; weights are positive and sum to exactly 1.
struct Sample {
  std::size_t dim = 0;
  std::vector<RPoint> points;
  std::vector<Rational> weights;

  std::size_t size() const { return points.size(); }

  static Sample uniform(std::vector<RPoint> pts) {
    if (pts.empty()) fail(ErrorKind::ValidationError, "sample has no points");
    Sample s;
    s.dim = pts.front().size();
    const auto n = static_cast<unsigned long>(pts.size());
    s.weights.assign(pts.size(), Rational(1, n));
    s.points = std::move(pts);
    s.validate();
    return s;
  }

  /// Normalizes positive weights to sum to one.
  static Sample weighted(std::vector<RPoint> pts, std::vector<Rational> w) {
    if (pts.empty()) fail(ErrorKind::ValidationError, "sample has no points");
    if (w.size() != pts.size()) fail(ErrorKind::DimensionMismatch, "weight count differs from point count");
    Rational total = 0;
    for (const auto& x : w) {
      if (x <= 0) fail(ErrorKind::ValidationError, "weights must be positive");
      total += x;
    }
    for (auto& x : w) x /= total;
    Sample s;
    s.dim = pts.front().size();
    s.points = std::move(pts);
    s.weights = std::move(w);
    s.validate();
    return s;
  }

  void validate() const {
    if (points.empty()) fail(ErrorKind::ValidationError, "sample has no points");
    if (weights.size() != points.size()) fail(ErrorKind::DimensionMismatch, "weight count differs from point count");
    Rational total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != dim)
        fail(ErrorKind::DimensionMismatch, "point " + std::to_string(i + 1) + " has the wrong dimension");
      if (weights[i] <= 0) fail(ErrorKind::ValidationError, "weights must be positive");
      total += weights[i];
    }
    if (total != 1) fail(ErrorKind::ValidationError, "weights do not sum to 1");
  }

  /// Identical points merged, weights summed; order of first appearance kept.
  Sample merged_duplicates() const {
    std::map<RPoint, std::size_t> where;
    Sample out;
    out.dim = dim;
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto [it, fresh] = where.emplace(points[i], out.points.size());
      if (fresh) {
        out.points.push_back(points[i]);
        out.weights.push_back(weights[i]);
      } else {
        out.weights[it->second] += weights[i];
      }
    }
    return out;
  }

  /// Points restricted to `coords`.
  std::vector<RPoint> projected(const std::vector<int>& coords) const {
    std::vector<RPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) {
      RPoint q(coords.size());
      for (std::size_t t = 0; t < coords.size(); ++t) q[t] = p[coords[t]];
      out.push_back(std::move(q));
    }
    return out;
  }
};

}  // namespace lcgm
