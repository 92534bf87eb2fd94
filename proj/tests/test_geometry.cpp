#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "lcgm/io.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/support.hpp"
#include "test_util.hpp"

using namespace lcgm;
using lcgm::test::rp;
using lcgm::test::sorted;

namespace {

Polytope cube(std::size_t d, int lo = 0, int hi = 1) {
  std::vector<RPoint> pts;
  for (unsigned m = 0; m < (1u << d); ++m) {
    RPoint p(d);
    for (std::size_t j = 0; j < d; ++j) p[j] = (m >> j) & 1 ? hi : lo;
    pts.push_back(p);
  }
  return Polytope::hull(pts, d);
}

// Volume by cones over facets from an interior point; each facet measured in a
// coordinate projection, so everything stays rational.
Rational pyramid_volume(const Polytope& p) {
  const std::size_t d = p.dim();
  if (!p.full_dimensional()) return 0;
  if (d == 1) return p.vertices().back()[0] - p.vertices().front()[0];
  RPoint c(d);
  for (const auto& v : p.vertices())
    for (std::size_t j = 0; j < d; ++j) c[j] += v[j];
  for (auto& x : c) x /= static_cast<unsigned long>(p.vertices().size());
  Rational total = 0;
  for (std::size_t f = 0; f < p.facets().size(); ++f) {
    const auto& h = p.facets()[f];
    std::size_t drop = 0;
    while (h.a[drop] == 0) ++drop;
    std::vector<int> keep;
    for (std::size_t j = 0; j < d; ++j)
      if (j != drop) keep.push_back(static_cast<int>(j));
    std::vector<RPoint> face;
    for (std::size_t i = 0; i < p.vertices().size(); ++i)
      if (p.facet_vertices()[f].test(i)) face.push_back(p.vertices()[i]);
    Polytope proj = project(Polytope::hull(face, d), keep);
    total += (h.b - Polytope::dot(h.a, c)) * pyramid_volume(proj) / (static_cast<unsigned long>(d) * abs(h.a[drop]));
  }
  return total;
}

Sample path_sample() { return Sample::uniform({rp({"0", "1", "2"}), rp({"1", "5", "4"}), rp({"2", "3", "5"})}); }

}  // namespace

TEST(ConvexHull, InteriorPointDropped) {
  auto p = Polytope::hull({rp({"0", "0"}), rp({"1", "0"}), rp({"0", "1"}), rp({"1/4", "1/4"})}, 2);
  EXPECT_EQ(p.vertices(), sorted({rp({"0", "0"}), rp({"1", "0"}), rp({"0", "1"})}));
  EXPECT_EQ(p.facets().size(), 3u);
  EXPECT_TRUE(p.contains(rp({"1/4", "1/4"})));
  EXPECT_FALSE(p.contains(rp({"1", "1"})));
}

TEST(ConvexHull, FourCycleDSetPointsAreAllVertices) {
  auto pts = io::read_points_csv(test::data_path("fourcycle_dset_vertices.csv"));
  ASSERT_EQ(pts.size(), 18u);
  auto p = Polytope::hull(pts, 4);
  EXPECT_EQ(p.vertices(), sorted(pts));
  EXPECT_EQ(p.affine_dim(), 4);
}

TEST(ConvexHull, SinglePoint) {
  auto p = Polytope::hull({rp({"3", "1/2"})}, 2);
  EXPECT_EQ(p.affine_dim(), 0);
  EXPECT_EQ(p.vertices().size(), 1u);
  EXPECT_EQ(p.equations().size(), 2u);
  EXPECT_TRUE(p.contains(rp({"3", "1/2"})));
  EXPECT_FALSE(p.contains(rp({"3", "1"})));
}

TEST(ConvexHull, DimensionMismatch) {
  EXPECT_THROW(Polytope::hull({rp({"1", "2"}), rp({"1"})}, 2), Error);
}

TEST(ConvexHull, LowerDimensionalCarriesEquations) {
  auto p = Polytope::hull({rp({"0", "0", "1"}), rp({"1", "0", "2"}), rp({"0", "1", "1"}), rp({"1", "1", "2"})}, 3);
  EXPECT_EQ(p.affine_dim(), 2);
  EXPECT_EQ(p.equations().size(), 1u);
  EXPECT_EQ(p.vertices().size(), 4u);
  EXPECT_EQ(p.volume(), 0);
  auto q = Polytope::from_constraints(3, p.facets(), p.equations());
  EXPECT_EQ(p, q);
}

TEST(Project, CubeToSquare) { EXPECT_EQ(project(cube(3), {0, 1}), cube(2)); }

TEST(Project, PathSupportTriangle) {
  auto hull = Polytope::hull(path_sample().points, 3);
  auto tri = project(hull, {0, 1});
  EXPECT_EQ(tri.vertices(), sorted({rp({"0", "1"}), rp({"1", "5"}), rp({"2", "3"})}));
}

TEST(Project, IdentityAndEmptyCoordinates) {
  auto c = cube(3);
  EXPECT_EQ(project(c, {0, 1, 2}), c);
  try {
    project(c, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCoordinateSet);
  }
}

TEST(Extrude, IntervalToSquare) {
  auto iv = Polytope::hull({rp({"0"}), rp({"1"})}, 1);
  auto sq = extrude_preimage(iv, {0}, 2, {std::nullopt, Interval{0, 1}});
  EXPECT_EQ(sq, cube(2));
}

TEST(Extrude, TriangleToPrism) {
  auto tri = Polytope::hull({rp({"0", "1"}), rp({"1", "5"}), rp({"2", "3"})}, 2);
  auto prism = extrude_preimage(tri, {0, 1}, 3, {std::nullopt, std::nullopt, Interval{2, 5}});
  EXPECT_EQ(prism.vertices().size(), 6u);
  EXPECT_EQ(prism.facets().size(), 5u);
  EXPECT_TRUE(prism.contains(rp({"1", "5", "2"})));
}

TEST(Extrude, FullCoordinatesUnchanged) {
  auto c = cube(3);
  EXPECT_EQ(extrude_preimage(c, {0, 1, 2}, 3, {}), c);
}

TEST(Intersect, OffsetSquares) {
  auto a = cube(2);
  auto b = Polytope::hull({rp({"1/2", "0"}), rp({"3/2", "0"}), rp({"1/2", "1"}), rp({"3/2", "1"})}, 2);
  auto r = intersect({a, b});
  EXPECT_EQ(r.vertices(), sorted({rp({"1/2", "0"}), rp({"1", "0"}), rp({"1/2", "1"}), rp({"1", "1"})}));
}

TEST(Intersect, PathSupportPrisms) {
  auto hull = Polytope::hull(path_sample().points, 3);
  std::vector<std::optional<Interval>> box(3, Interval{-10, 10});
  auto p12 = extrude_preimage(project(hull, {0, 1}), {0, 1}, 3, box);
  auto p23 = extrude_preimage(project(hull, {1, 2}), {1, 2}, 3, box);
  auto r = intersect({p12, p23});
  EXPECT_EQ(r.vertices(), sorted({rp({"0", "1", "2"}), rp({"1", "5", "4"}), rp({"2", "3", "5"}), rp({"2", "3", "3"}),
                                  rp({"1/2", "3", "5"})}));
}

TEST(Intersect, Idempotent) {
  auto p = Polytope::hull(path_sample().points, 3);
  EXPECT_EQ(intersect({p, p}), p);
  auto c = cube(3);
  EXPECT_EQ(intersect({c, c}), c);
}

TEST(Intersect, DisjointIsEmpty) {
  auto a = cube(2);
  auto b = cube(2, 2, 3);
  EXPECT_TRUE(intersect({a, b}).is_empty());
}

TEST(SupportPolytope, PathExample) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = support_polytope(Graph::path(3), path_sample());
  EXPECT_EQ(s.vertices(), sorted({rp({"0", "1", "2"}), rp({"1", "5", "4"}), rp({"2", "3", "5"}), rp({"2", "3", "3"}),
                                  rp({"1/2", "3", "5"})}));
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(SupportPolytope, CompleteGraphIsHull) {
  auto x = path_sample();
  EXPECT_EQ(support_polytope(Graph::complete(3), x), Polytope::hull(x.points, 3));
}

TEST(SupportPolytope, NormalSampleOnPath) {
  auto x = io::read_sample_csv(test::data_path("normal3d_sample.csv"));
  auto s = support_polytope(Graph::path(3), x);
  auto expected = io::read_points_csv(test::data_path("normal3d_path_support.csv"));
  ASSERT_EQ(s.vertices().size(), 24u);
  // The reference coordinates are not rounded consistently in the last digit, so every
  // vertex must lie within one unit of the third decimal of a distinct row.
  std::vector<bool> used(expected.size(), false);
  const Rational unit(1, 1000);
  for (const auto& v : s.vertices()) {
    bool found = false;
    for (std::size_t r = 0; r < expected.size() && !found; ++r) {
      if (used[r]) continue;
      bool close = true;
      for (std::size_t j = 0; j < 3; ++j) close = close && abs(v[j] - expected[r][j]) < unit;
      if (close) used[r] = found = true;
    }
    EXPECT_TRUE(found) << v[0] << " " << v[1] << " " << v[2];
  }
}

TEST(SupportPolytope, ProjectionsMatchHullProjections) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + trial % 3;
    Graph g = test::random_graph(d, 0.5, rng);
    auto x = Sample::uniform(test::random_rational_points(d + 3, d, 5, 2, rng));
    auto s = support_polytope(g, x);
    auto hull = Polytope::hull(x.points, d);
    for (const auto& c : maximal_cliques(g)) EXPECT_EQ(project(s, c), project(hull, c));
    for (const auto& p : x.points) EXPECT_TRUE(s.contains(p));
  }
}

TEST(MarkovExpand, BoxIsFixed) {
  auto c = cube(3);
  for (const auto& st : markov_statements(Graph::path(3))) EXPECT_EQ(markov_expand(c, st), c);
}

TEST(MarkovExpand, TriangleToSquare) {
  auto tri = Polytope::hull({rp({"0", "0"}), rp({"1", "0"}), rp({"0", "1"})}, 2);
  EXPECT_EQ(markov_expand(tri, MarkovStatement{{0}, {1}, {}}), cube(2));
}

TEST(MarkovExpand, PointIsFixed) {
  auto p = Polytope::hull({rp({"1", "2", "3"})}, 3);
  EXPECT_EQ(markov_expand(p, MarkovStatement{{0}, {2}, {1}}), p);
}

TEST(DSets, FourCycleGolden) {
  auto x = Sample::uniform({rp({"7", "2", "8", "0"}), rp({"3", "7", "9", "3"}), rp({"7", "9", "8", "4"}),
                            rp({"8", "0", "1", "8"})});
  auto seq = dset_sequence(Graph::cycle(4), x);
  EXPECT_TRUE(seq.stabilized);
  EXPECT_EQ(seq.index, 7u);
  auto golden = io::read_points_csv(test::data_path("fourcycle_dset_vertices.csv"));
  EXPECT_EQ(seq.sets.back().vertices(), sorted(golden));
  EXPECT_EQ(seq.sets.back(), seq.support);
  for (std::size_t i = 1; i < seq.volumes.size(); ++i) EXPECT_GT(seq.volumes[i], seq.volumes[i - 1]);
}

TEST(DSets, ChordalPathStabilizesAtOne) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = Sample::uniform(test::random_rational_points(5, 3, 4, 3, rng));
    auto seq = dset_sequence(Graph::path(3), x);
    EXPECT_TRUE(seq.stabilized);
    EXPECT_LE(seq.index, 1u);
    EXPECT_EQ(seq.sets.back(), seq.support);
  }
}

TEST(DSets, CompleteGraphStabilizesAtZero) {
  auto x = path_sample();
  auto seq = dset_sequence(Graph::complete(3), x);
  EXPECT_TRUE(seq.stabilized);
  EXPECT_EQ(seq.index, 0u);
  EXPECT_EQ(seq.sets.back(), Polytope::hull(x.points, 3));
}

TEST(Volume, UnitCubeAndSimplex) {
  for (std::size_t d = 1; d <= 4; ++d) {
    EXPECT_EQ(cube(d).volume(), 1);
    std::vector<RPoint> pts{RPoint(d)};
    for (std::size_t j = 0; j < d; ++j) {
      RPoint e(d);
      e[j] = 1;
      pts.push_back(e);
    }
    EXPECT_EQ(Polytope::hull(pts, d).volume(), 1 / detail::factorial(d));
  }
}

TEST(Volume, FourCycleDSetMatchesPyramidOracle) {
  auto p = Polytope::hull(io::read_points_csv(test::data_path("fourcycle_dset_vertices.csv")), 4);
  Rational v = p.volume();
  EXPECT_GT(v, 0);
  EXPECT_EQ(v, pyramid_volume(p));
}

TEST(Volume, RandomPolytopesMatchOracleAndPermutations) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t d = 2 + trial % 3;
    auto pts = test::random_rational_points(d + 4, d, 5, 3, rng);
    auto p = Polytope::hull(pts, d);
    if (!p.full_dimensional()) continue;
    Rational v = p.volume();
    EXPECT_EQ(v, pyramid_volume(p));
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(project(Polytope::hull(pts, d), perm).volume(), v);
  }
}

TEST(RoundTrip, VertexFacetVertexIsIdentity) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t d = 1 + trial % 4;
    std::size_t n = 1 + trial % 9;
    auto p = Polytope::hull(test::random_rational_points(n, d, 6, 1 + trial % 4, rng), d);
    auto q = Polytope::from_constraints(d, p.facets(), p.equations());
    ASSERT_TRUE(polytope_equal(p, q)) << "trial " << trial;
    EXPECT_EQ(p.facets(), q.facets());
  }
}

TEST(PolytopeEqual, Basic) {
  auto c = cube(3);
  EXPECT_TRUE(polytope_equal(c, c));
  EXPECT_FALSE(polytope_equal(c, cube(3, 1, 2)));
}

TEST(Triangulate, SimplicesTileTheVolume) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t d = 2 + trial % 3;
    auto p = Polytope::hull(test::random_rational_points(d + 5, d, 5, 2, rng), d);
    if (!p.full_dimensional()) continue;
    Rational total = 0;
    for (const auto& s : p.triangulate()) {
      ASSERT_EQ(s.size(), d + 1);
      Rational v = p.simplex_volume(s);
      EXPECT_GT(v, 0);
      total += v;
    }
    EXPECT_EQ(total, p.volume());
  }
}

TEST(SampleCsv, ParsesExactly) {
  auto s = io::parse_sample_csv("0.5,1\n2,-1e-1\n");
  EXPECT_EQ(s.points[0], rp({"1/2", "1"}));
  EXPECT_EQ(s.points[1], rp({"2", "-1/10"}));
  EXPECT_EQ(s.weights[0], Rational(1, 2));
  EXPECT_THROW(io::parse_sample_csv("1,2\n3\n"), Error);
  auto w = io::parse_sample_csv("x,y,weight\n0,0,1\n1,1,3\n");
  EXPECT_EQ(w.weights[1], Rational(3, 4));
  auto t3 = io::read_sample_csv(test::data_path("normal2d_sample.csv"));
  EXPECT_EQ(t3.size(), 50u);
  EXPECT_EQ(t3.dim, 2u);
  EXPECT_EQ(t3.weights[7], Rational(1, 50));
}

TEST(SampleCsv, MergesDuplicates) {
  auto s = io::parse_sample_csv("0,0\n1,1\n0,0\n", io::CsvOptions{true});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.weights[0], Rational(2, 3));
}
