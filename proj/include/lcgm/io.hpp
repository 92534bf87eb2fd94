#pragma once

// Sample CSV and JSON (de)serialization. Vertex labels are 1-based on disk.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lcgm/error.hpp"
#include "lcgm/graph.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/rational.hpp"
#include "lcgm/sample.hpp"

namespace lcgm::io {

using json = nlohmann::json;

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trimmed(std::string s) {
  auto b = s.find_first_not_of(" \t\r\"");
  auto e = s.find_last_not_of(" \t\r\"");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

struct CsvOptions {
  bool merge_duplicates = false;
};

/// Reads d numeric columns plus an optional trailing `weight` column. A header
/// row is recognized by a non-numeric first cell.
inline Sample parse_sample_csv(std::istream& in, const CsvOptions& opt = {}) {
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
  bool has_weight = false;
  bool first = true;
  std::size_t ln = 0, width = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (trimmed(line).empty() || trimmed(line)[0] == '#') continue;
    auto cells = split_csv_line(line);
    for (auto& c : cells) c = trimmed(c);
    if (first) {
      first = false;
      bool header = false;
      try {
        parse_rational(cells[0]);
      } catch (const Error&) {
        header = true;
      }
      if (header) {
        has_weight = cells.size() >= 2 && cells.back() == "weight";
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      fail(ErrorKind::ParseError, "row " + std::to_string(ln) + ": expected " + std::to_string(width) +
                                      " columns, found " + std::to_string(cells.size()));
    rows.push_back(std::move(cells));
    line_no.push_back(ln);
  }
  if (rows.empty()) fail(ErrorKind::ParseError, "sample has no rows");
  const std::size_t d = has_weight ? width - 1 : width;
  if (d == 0) fail(ErrorKind::ParseError, "sample has no coordinate columns");
  std::vector<RPoint> pts;
  std::vector<Rational> w;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    RPoint p(d);
    for (std::size_t c = 0; c < width; ++c) {
      Rational v;
      try {
        v = parse_rational(rows[r][c]);
      } catch (const Error& e) {
        fail(ErrorKind::ParseError, "row " + std::to_string(line_no[r]) + ", column " + std::to_string(c + 1) + ": " +
                                        e.what());
      }
      if (c < d) p[c] = v;
      else w.push_back(v);
    }
    pts.push_back(std::move(p));
  }
  Sample s = has_weight ? Sample::weighted(std::move(pts), std::move(w)) : Sample::uniform(std::move(pts));
  return opt.merge_duplicates ? s.merged_duplicates() : s;
}

inline Sample parse_sample_csv(const std::string& text, const CsvOptions& opt = {}) {
  std::istringstream in(text);
  return parse_sample_csv(in, opt);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ValidationError, "cannot open '" + path + "'");
  return in;
}

inline Sample read_sample_csv(const std::string& path, const CsvOptions& opt = {}) {
  auto in = open_input(path);
  return parse_sample_csv(in, opt);
}

/// Plain list of points from a CSV file (header optional, no weights).
inline std::vector<RPoint> read_points_csv(const std::string& path) { return read_sample_csv(path).points; }

inline json rational_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(std::to_string(j.get<long long>()), 10);
  if (j.is_number_float()) return from_double(j.get<double>());
  fail(ErrorKind::ParseError, "expected a number or a \"p/q\" string");
}

inline json point_json(const RPoint& p) {
  json a = json::array();
  for (const auto& x : p) a.push_back(rational_json(x));
  return a;
}

/// Shortest decimal string that reads back to the same double.
inline std::string double_string(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline json graph_json(const Graph& g) {
  json e = json::array();
  for (auto [u, v] : g.edges()) e.push_back({u + 1, v + 1});
  return {{"d", g.d()}, {"edges", e}};
}

inline Graph graph_from_json(const json& j) {
  try {
    int d = j.at("d").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorKind::ParseError, "edge must be a pair of vertices");
      edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
    }
    return Graph(d, edges);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("graph JSON: ") + e.what());
  }
}

inline Graph read_graph(const std::string& path) {
  auto in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
  return graph_from_json(j);
}

inline json vertex_set_json(const VertexSet& s) {
  json a = json::array();
  for (int v : s) a.push_back(v + 1);
  return a;
}

inline json polytope_json(const Polytope& p) {
  json verts = json::array(), ineqs = json::array(), eqs = json::array();
  for (const auto& v : p.vertices()) verts.push_back(point_json(v));
  for (const auto& h : p.facets()) ineqs.push_back({{"a", point_json(h.a)}, {"b", rational_json(h.b)}});
  for (const auto& h : p.equations()) eqs.push_back({{"a", point_json(h.a)}, {"b", rational_json(h.b)}});
  return {{"dim", p.dim()}, {"affine_dim", p.affine_dim()}, {"vertices", verts}, {"inequalities", ineqs},
          {"equations", eqs}};
}

inline Polytope polytope_from_json(const json& j) {
  try {
    std::size_t dim = j.at("dim").get<std::size_t>();
    if (j.contains("vertices") && !j.at("vertices").empty()) {
      std::vector<RPoint> pts;
      for (const auto& v : j.at("vertices")) {
        RPoint p;
        for (const auto& x : v) p.push_back(rational_from_json(x));
        pts.push_back(std::move(p));
      }
      return Polytope::hull(std::move(pts), dim);
    }
    auto read = [&](const char* key) {
      std::vector<Halfspace> out;
      if (!j.contains(key)) return out;
      for (const auto& h : j.at(key)) {
        Halfspace hs;
        for (const auto& x : h.at("a")) hs.a.push_back(rational_from_json(x));
        hs.b = rational_from_json(h.at("b"));
        out.push_back(std::move(hs));
      }
      return out;
    };
    return Polytope::from_constraints(dim, read("inequalities"), read("equations"));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("polytope JSON: ") + e.what());
  }
}

}  // namespace lcgm::io
