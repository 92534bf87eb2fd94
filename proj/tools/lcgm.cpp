// lcgm: command-line front end.

#include <CLI11.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "lcgm/lcgm.hpp"
#include "lcgm/result_json.hpp"

using namespace lcgm;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Config {
  std::string graph;
  std::string sample;
  std::string weights = "uniform";
  std::string mode = "rational";
  std::string out;
  double gtol = 1e-6;
  std::size_t max_iter = 10000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool merge = false;
  bool no_product = false;
  // fit
  std::string grid;
  int grid_size = 0;
  // eval
  std::string result;
  std::string points;
  // decompose
  std::string matrix;
  // simplex-integral
  std::string vertices;
  std::string values;
  // gen
  std::size_t n = 100;
  int dim = 0;
  int digits = 6;
  std::string precision = "identity";
  // dsets
  std::size_t dset_iter = kDefaultDSetIterations;
};

/// A graph file (JSON) or an inline spec "d:u-v,u-v,...", 1-based.
Graph load_graph(const std::string& spec) {
  if (spec.empty()) fail(ErrorKind::ValidationError, "--graph is required");
  if (std::filesystem::exists(spec)) return io::read_graph(spec);
  static const std::regex inline_spec(R"(^(\d+):((\d+-\d+)(,\d+-\d+)*)?$)");
  if (!std::regex_match(spec, inline_spec)) fail(ErrorKind::ValidationError, "cannot open graph '" + spec + "'");
  const auto colon = spec.find(':');
  const int d = std::stoi(spec.substr(0, colon));
  std::vector<std::pair<int, int>> edges;
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto dash = item.find('-');
    edges.emplace_back(std::stoi(item.substr(0, dash)) - 1, std::stoi(item.substr(dash + 1)) - 1);
  }
  return Graph(d, edges);
}

Sample load_sample(const Config& cfg) {
  if (cfg.sample.empty()) fail(ErrorKind::ValidationError, "--sample is required");
  io::CsvOptions opt;
  opt.merge_duplicates = cfg.merge;
  Sample x = io::read_sample_csv(cfg.sample, opt);
  if (cfg.weights != "uniform") {
    auto w = io::read_sample_csv(cfg.weights);
    if (w.dim != 1) fail(ErrorKind::ParseError, "weights file must have a single column");
    if (w.size() != x.size()) fail(ErrorKind::DimensionMismatch, "weight count differs from sample size");
    std::vector<Rational> ws;
    for (const auto& p : w.points) ws.push_back(p[0]);
    x = Sample::weighted(x.points, ws);
    if (cfg.merge) x = x.merged_duplicates();
  }
  return x;
}

void emit(const Config& cfg, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) fail(ErrorKind::ValidationError, "cannot write '" + cfg.out + "'");
  f << text;
}

json cliques_json(const CliqueList& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(io::vertex_set_json(c));
  return a;
}

int cmd_cliques(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  emit(cfg, {{"graph", io::graph_json(g)}, {"cliques", cliques_json(maximal_cliques(g))}});
  return 0;
}

int cmd_chordal(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  auto r = is_chordal(g);
  json j{{"chordal", r.chordal}};
  if (r.chordal) {
    json peo = json::array();
    for (int v : r.elimination_order) peo.push_back(v + 1);
    j["elimination_order"] = peo;
  } else {
    j["chordal_cover"] = io::graph_json(chordal_cover(g));
  }
  emit(cfg, j);
  return 0;
}

int cmd_riporder(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  auto order = rip_ordering(g);
  json seps = json::array();
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    VertexSet rest;
    for (std::size_t j = i + 1; j < order.size(); ++j) rest = set_union(rest, order[j]);
    seps.push_back(io::vertex_set_json(set_intersection(order[i], rest)));
  }
  emit(cfg, {{"order", cliques_json(order)}, {"separators", seps}});
  return 0;
}

int cmd_jtree(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  auto jt = junction_tree(g);
  json edges = json::array();
  for (std::size_t k = 0; k < jt.edges.size(); ++k)
    edges.push_back({{"cliques", {jt.edges[k].first, jt.edges[k].second}},
                     {"separator", io::vertex_set_json(jt.separators[k])}});
  emit(cfg, {{"cliques", cliques_json(jt.cliques)}, {"edges", edges}});
  return 0;
}

int cmd_support(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  Sample x = load_sample(cfg);
  auto p = support_polytope(g, x);
  emit(cfg, {{"support", io::polytope_json(p)},
             {"volume", io::rational_json(p.volume())},
             {"vertex_count", p.vertices().size()}});
  return 0;
}

int cmd_dsets(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  Sample x = load_sample(cfg);
  auto seq = dset_sequence(g, x, cfg.dset_iter);
  json sets = json::array();
  for (std::size_t i = 0; i < seq.sets.size(); ++i) {
    json verts = json::array();
    for (const auto& v : seq.sets[i].vertices()) verts.push_back(io::point_json(v));
    sets.push_back({{"index", i}, {"vertices", verts}, {"volume", io::rational_json(seq.volumes[i])}});
  }
  emit(cfg, {{"sets", sets},
             {"stabilization_index", seq.index},
             {"stabilized", seq.stabilized},
             {"equals_support", seq.stabilized && seq.sets.back() == seq.support},
             {"support_volume", io::rational_json(seq.support_volume)}});
  return seq.stabilized ? 0 : kExitNumerical;
}

/// Grid over the support's bounding box with tent values and density, one row per node.
void write_grid(const MLEResult& r, const std::string& path, int m) {
  const std::size_t d = r.sample.dim;
  std::vector<double> lo(d, HUGE_VAL), hi(d, -HUGE_VAL);
  for (const auto& v : r.support.vertices())
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], v[j].get_d());
      hi[j] = std::max(hi[j], v[j].get_d());
    }
  std::ofstream f(path);
  if (!f) fail(ErrorKind::ValidationError, "cannot write '" + path + "'");
  for (std::size_t j = 0; j < d; ++j) f << "x" << j + 1 << ",";
  for (std::size_t c = 0; c < r.cliques.size(); ++c) f << "tent" << c + 1 << ",";
  f << "log_density,density\n";
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    for (std::size_t j = 0; j < d; ++j) x[j] = m == 1 ? lo[j] : lo[j] + (hi[j] - lo[j]) * idx[j] / (m - 1);
    for (std::size_t j = 0; j < d; ++j) f << io::double_string(x[j]) << ",";
    double total = 0;
    for (std::size_t c = 0; c < r.cliques.size(); ++c) {
      std::vector<double> xc;
      for (int v : r.cliques[c]) xc.push_back(x[v]);
      double h = r.tents[c].eval(xc);
      total += h;
      f << io::double_string(h) << ",";
    }
    if (std::isnan(total)) total = -HUGE_VAL;
    f << io::double_string(total) << "," << io::double_string(std::isinf(total) ? 0.0 : std::exp(total)) << "\n";
    std::size_t j = 0;
    while (j < d && ++idx[j] == m) idx[j++] = 0;
    if (j == d) break;
  }
}

int cmd_fit(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  Sample x = load_sample(cfg);
  if (!cfg.grid.empty() && x.dim > 3) fail(ErrorKind::ValidationError, "grid output is available for d <= 3 only");
  auto check = check_sample_size(g, x.merged_duplicates().size());
  for (const auto& w : check.warnings) std::cerr << "warning: " << w << "\n";
  FitOptions opt;
  opt.gtol = cfg.gtol;
  opt.max_iter = cfg.max_iter;
  opt.threads = cfg.threads;
  opt.random_init_seed = cfg.seed;
  opt.product_fast_path = !cfg.no_product;
  auto r = fit(g, x, opt);
  emit(cfg, io::result_json(r));
  if (!cfg.grid.empty()) write_grid(r, cfg.grid, cfg.grid_size > 0 ? cfg.grid_size : (x.dim == 3 ? 21 : 51));
  if (!r.trace.converged) fail(ErrorKind::MaxIterations, r.trace.stop_reason + " (result written, flagged non-converged)");
  return 0;
}

int cmd_eval(const Config& cfg) {
  if (cfg.result.empty()) fail(ErrorKind::ValidationError, "--result is required");
  if (cfg.points.empty()) fail(ErrorKind::ValidationError, "--points is required");
  auto in = io::open_input(cfg.result);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, "'" + cfg.result + "': " + e.what());
  }
  auto r = io::result_from_json(j);
  auto pts = io::read_points_csv(cfg.points);
  json rows = json::array();
  for (const auto& p : pts) {
    if (p.size() != r.sample.dim) fail(ErrorKind::DimensionMismatch, "point dimension differs from the fitted density");
    const double l = r.log_density(p);
    rows.push_back({{"point", io::point_json(p)}, {"log_density", l}, {"density", std::isinf(l) ? 0.0 : std::exp(l)}});
  }
  emit(cfg, {{"evaluations", rows}});
  return 0;
}

template <class T>
json matrix_json(const Mat<T>& m) {
  json a = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& v : row) {
      if constexpr (std::is_same_v<T, Rational>)
        r.push_back(io::rational_json(v));
      else
        r.push_back(v);
    }
    a.push_back(r);
  }
  return a;
}

template <class T>
int run_decompose(const Config& cfg, const json& input, const Graph& g) {
  QuadraticForm<T> q;
  for (const auto& row : input.at("K")) {
    std::vector<T> r;
    for (const auto& v : row) {
      if constexpr (std::is_same_v<T, Rational>)
        r.push_back(io::rational_from_json(v));
      else
        r.push_back(v.is_string() ? io::rational_from_json(v).get_d() : v.get<double>());
    }
    q.K.push_back(std::move(r));
  }
  auto dec = gaussian_convex_decomposition(q, g);
  auto rep = verify_decomposition(q, dec, g);
  json pieces = json::array();
  for (std::size_t i = 0; i < dec.pieces.size(); ++i)
    pieces.push_back({{"clique", io::vertex_set_json(dec.cliques[i])},
                      {"matrix", matrix_json(dec.pieces[i])},
                      {"psd", static_cast<bool>(rep.psd[i])}});
  json seps = json::array(), thetas = json::array();
  for (std::size_t i = 0; i < dec.thetas.size(); ++i) {
    seps.push_back(io::vertex_set_json(dec.separators[i]));
    thetas.push_back(matrix_json(dec.thetas[i]));
  }
  emit(cfg, {{"mode", cfg.mode},
             {"pieces", pieces},
             {"separators", seps},
             {"thetas", thetas},
             {"verify", {{"ok", rep.ok()}, {"sum_identity", rep.sum_identity}, {"failures", rep.failures}}}});
  return rep.ok() ? 0 : kExitNumerical;
}

int cmd_decompose(const Config& cfg) {
  Graph g = load_graph(cfg.graph);
  if (cfg.matrix.empty()) fail(ErrorKind::ValidationError, "--matrix is required");
  auto in = io::open_input(cfg.matrix);
  json j;
  try {
    in >> j;
    if (j.is_array()) j = json{{"K", j}};
    if (cfg.mode == "rational") return run_decompose<Rational>(cfg, j, g);
    if (cfg.mode == "float") return run_decompose<double>(cfg, j, g);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, "'" + cfg.matrix + "': " + e.what());
  }
  fail(ErrorKind::ValidationError, "--mode must be rational or float");
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (io::trimmed(item.substr(used)).size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError, "not a number: '" + item + "'");
    }
  }
  return out;
}

int cmd_simplex_integral(const Config& cfg) {
  std::vector<std::vector<double>> verts;
  std::stringstream ss(cfg.vertices);
  std::string row;
  while (std::getline(ss, row, ';')) verts.push_back(parse_doubles(row));
  auto vals = parse_doubles(cfg.values);
  for (const auto& v : verts)
    if (v.size() + 1 != verts.size()) fail(ErrorKind::DimensionMismatch, "need k+1 vertices in R^k");
  if (vals.size() != verts.size()) fail(ErrorKind::DimensionMismatch, "one value per vertex required");
  double vol = verts.empty() ? 0.0 : detail::simplex_volume_d(verts);
  auto r = exp_simplex_from_volume(vol, vals);
  emit(cfg, {{"volume", vol}, {"integral", r.integral}, {"moments", r.moments}});
  return 0;
}

/// Gaussian draws; with --precision random the precision matrix is I plus random
/// clique-supported PSD terms, so the law is Markov to the graph.
int cmd_gen(const Config& cfg) {
  int d = cfg.dim;
  std::optional<Graph> g;
  if (!cfg.graph.empty()) {
    g = load_graph(cfg.graph);
    if (d != 0 && d != g->d()) fail(ErrorKind::DimensionMismatch, "--dim differs from the graph");
    d = g->d();
  }
  if (d <= 0) fail(ErrorKind::ValidationError, "--dim or --graph is required");
  if (cfg.digits < 1 || cfg.digits > 17) fail(ErrorKind::ValidationError, "--digits must be in 1..17");
  std::mt19937_64 rng(cfg.seed.value_or(0));
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(d, d);
  if (cfg.precision == "random") {
    for (const auto& c : maximal_cliques(g ? *g : Graph::complete(d))) {
      const auto k = static_cast<Eigen::Index>(c.size());
      Eigen::MatrixXd b(k, k);
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) b(i, j) = 0.5 * nd(rng);
      Eigen::MatrixXd p = b.transpose() * b;
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) K(c[i], c[j]) += p(i, j);
    }
  } else if (cfg.precision != "identity") {
    fail(ErrorKind::ValidationError, "--precision must be identity or random");
  }
  // x = L^{-T} z with K = L L^T has covariance K^{-1}.
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  std::ostringstream csv;
  for (int j = 0; j < d; ++j) csv << (j ? "," : "") << "x" << j + 1;
  csv << "\n";
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = nd(rng);
    Eigen::VectorXd x = llt.matrixU().solve(z);
    for (int j = 0; j < d; ++j) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.*f", cfg.digits, x(j));
      csv << (j ? "," : "") << buf;
    }
    csv << "\n";
  }
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) fail(ErrorKind::ValidationError, "cannot write '" + cfg.out + "'");
    f << csv.str();
  }
  return 0;
}

int report(ErrorKind kind, const std::string& message) {
  json j{{"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return is_numerical(kind) ? kExitNumerical : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-concave maximum likelihood estimation in undirected graphical models"};
  app.require_subcommand(1);
  Config cfg;

  auto add_graph = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--graph", cfg.graph, "graph JSON file or inline 'd:u-v,...' (1-based)")->envname("LCGM_GRAPH");
    if (required) o->required();
  };
  auto add_sample = [&](CLI::App* s) {
    s->add_option("--sample", cfg.sample, "sample CSV (d columns, optional trailing weight column)")
        ->envname("LCGM_SAMPLE")
        ->required();
    s->add_option("--weights", cfg.weights, "weights CSV (one column) or 'uniform'")->envname("LCGM_WEIGHTS");
    s->add_flag("--merge-duplicates", cfg.merge, "merge identical sample points, summing weights");
  };
  auto add_out = [&](CLI::App* s) {
    s->add_option("--out", cfg.out, "output path (default stdout)")->envname("LCGM_OUT");
  };

  std::vector<std::pair<CLI::App*, int (*)(const Config&)>> cmds;
  auto* c = app.add_subcommand("cliques", "maximal cliques");
  add_graph(c, true);
  add_out(c);
  cmds.emplace_back(c, cmd_cliques);

  c = app.add_subcommand("chordal", "chordality test with elimination order or chordal cover");
  add_graph(c, true);
  add_out(c);
  cmds.emplace_back(c, cmd_chordal);

  c = app.add_subcommand("riporder", "clique ordering with the running intersection property");
  add_graph(c, true);
  add_out(c);
  cmds.emplace_back(c, cmd_riporder);

  c = app.add_subcommand("jtree", "junction tree");
  add_graph(c, true);
  add_out(c);
  cmds.emplace_back(c, cmd_jtree);

  c = app.add_subcommand("support", "exact support polytope of the MLE");
  add_graph(c, true);
  add_sample(c);
  add_out(c);
  cmds.emplace_back(c, cmd_support);

  c = app.add_subcommand("dsets", "D-set sequence converging to the support");
  add_graph(c, true);
  add_sample(c);
  add_out(c);
  c->add_option("--max-iter", cfg.dset_iter, "iteration cap")->envname("LCGM_MAX_ITER");
  cmds.emplace_back(c, cmd_dsets);

  c = app.add_subcommand("fit", "maximum-likelihood fit");
  add_graph(c, true);
  add_sample(c);
  add_out(c);
  c->add_option("--gtol", cfg.gtol, "supergradient sup-norm tolerance")->envname("LCGM_GTOL")->check(CLI::PositiveNumber);
  c->add_option("--max-iter", cfg.max_iter, "BFGS iteration cap")->envname("LCGM_MAX_ITER")->check(CLI::PositiveNumber);
  c->add_option("--seed", cfg.seed, "perturb the initial heights with this seed")->envname("LCGM_SEED");
  c->add_option("--threads", cfg.threads, "worker threads")->envname("LCGM_THREADS")->check(CLI::Range(1u, 1024u));
  c->add_flag("--no-product", cfg.no_product, "fit disconnected graphs jointly");
  c->add_option("--grid", cfg.grid, "write a tent/density grid CSV here (d <= 3)");
  c->add_option("--grid-size", cfg.grid_size, "nodes per axis")->check(CLI::Range(1, 1000));
  cmds.emplace_back(c, cmd_fit);

  c = app.add_subcommand("eval", "evaluate a stored fit at points");
  c->add_option("--result", cfg.result, "fit result JSON")->required();
  c->add_option("--points", cfg.points, "points CSV")->required();
  add_out(c);
  cmds.emplace_back(c, cmd_eval);

  c = app.add_subcommand("decompose", "clique decomposition of a Gaussian quadratic form");
  add_graph(c, true);
  c->add_option("--matrix", cfg.matrix, "JSON: {\"K\": rows} or a bare array of rows")->required();
  c->add_option("--mode", cfg.mode, "rational or float")->envname("LCGM_MODE")->check(CLI::IsMember({"rational", "float"}));
  add_out(c);
  cmds.emplace_back(c, cmd_decompose);

  c = app.add_subcommand("simplex-integral", "integral and moments of exp(affine) over a simplex");
  c->add_option("--vertices", cfg.vertices, "vertices as 'x,y;x,y;...'")->required();
  c->add_option("--values", cfg.values, "values at the vertices, comma separated")->required();
  add_out(c);
  cmds.emplace_back(c, cmd_simplex_integral);

  c = app.add_subcommand("gen", "seeded Gaussian sample as CSV");
  add_graph(c, false);
  c->add_option("--dim", cfg.dim, "dimension when no graph is given");
  c->add_option("--n", cfg.n, "number of points")->check(CLI::PositiveNumber);
  c->add_option("--seed", cfg.seed, "random seed")->envname("LCGM_SEED");
  c->add_option("--digits", cfg.digits, "decimal digits written");
  c->add_option("--precision", cfg.precision, "identity or random");
  add_out(c);
  cmds.emplace_back(c, cmd_gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::ValidationError, e.what());
  }

  try {
    for (auto& [sub, run] : cmds)
      if (sub->parsed()) return run(cfg);
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::ValidationError, e.what());
  }
  return kExitValidation;
}
