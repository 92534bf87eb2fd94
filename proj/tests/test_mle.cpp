#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lcgm/mle.hpp"
#include "test_util.hpp"

using namespace lcgm;
using test::rp;

namespace {

Sample random_sample(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  return Sample::uniform(test::random_rational_points(n, d, 3, 8, rng));
}

}  // namespace

TEST(SampleSize, Bounds) {
  auto path = check_sample_size(Graph::path(3), 3);
  EXPECT_TRUE(path.pass);
  EXPECT_EQ(path.required, 3u);
  EXPECT_TRUE(path.warnings.empty());

  auto k3 = check_sample_size(Graph::complete(3), 3);
  EXPECT_FALSE(k3.pass);
  EXPECT_EQ(k3.required, 4u);

  auto c4 = check_sample_size(Graph::cycle(4), 4);
  EXPECT_TRUE(c4.pass);
  EXPECT_FALSE(c4.chordal);
  EXPECT_EQ(c4.cover_required, 4u);
  EXPECT_FALSE(c4.warnings.empty());
}

TEST(Fit, InsufficientSample) {
  auto x = Sample::uniform({rp({"0", "0", "0"}), rp({"1", "0", "0"}), rp({"0", "1", "0"}), rp({"0", "1", "0"})});
  try {
    fit(Graph::complete(3), x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSample);
  }
}

TEST(Fit, CollinearSampleIsDegenerate) {
  auto x = Sample::uniform({rp({"0", "0"}), rp({"1", "1"}), rp({"2", "2"}), rp({"3", "3"})});
  try {
    fit(Graph::complete(2), x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSupport);
  }
}

TEST(Fit, SimplexSampleGivesUniformDensity) {
  std::mt19937_64 rng(41);
  for (std::size_t d : {2u, 3u}) {
    auto x = random_sample(d + 1, d, rng);
    Graph g = Graph::complete(static_cast<int>(d));
    Objective obj(g, x);
    auto v = obj.evaluate(obj.uniform_heights());
    EXPECT_LT(detail::sup_norm(v.grad), 1e-8);
    auto r = fit(g, x);
    EXPECT_TRUE(r.trace.converged);
    EXPECT_NEAR(r.loglik, -std::log(r.support_volume.get_d()), 1e-6);
  }
}

TEST(Fit, NormalizedAtOptimum) {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 6; ++rep) {
    int d = 2 + rep % 2;
    Graph g = rep % 3 == 0 ? Graph::path(d) : test::random_interval_graph(d, rng);
    auto x = random_sample(8, static_cast<std::size_t>(d), rng);
    auto r = fit(g, x);
    ASSERT_TRUE(r.trace.converged) << rep << " " << r.trace.stop_reason;
    EXPECT_GE(r.integral_before, 0.999);
    EXPECT_LE(r.integral_before, 1.001);
    EXPECT_NEAR(r.integral_after, 1.0, 1e-12);
    EXPECT_NEAR(total_integral(r.graph, r.tents, r.support), 1.0, 1e-9);
    EXPECT_NEAR(loglik(r, x), r.loglik, 1e-9);
    // The uniform density on the support is feasible.
    EXPECT_GE(r.loglik, -std::log(r.support_volume.get_d()) - 1e-9);
  }
}

TEST(Fit, ProductPathMatchesJointFit) {
  std::mt19937_64 rng(43);
  auto x = random_sample(12, 2, rng);
  FitOptions fast, joint;
  joint.product_fast_path = false;
  auto a = fit(Graph(2), x, fast);
  auto b = fit(Graph(2), x, joint);
  ASSERT_EQ(a.component_results.size(), 2u);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-6);
  EXPECT_NEAR(a.loglik, a.component_results[0].loglik + a.component_results[1].loglik, 1e-12);
  EXPECT_EQ(a.support_volume, b.support_volume);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> p{std::uniform_real_distribution<double>(-3, 3)(rng),
                          std::uniform_real_distribution<double>(-3, 3)(rng)};
    EXPECT_NEAR(a.density(p), b.density(p), 1e-4);
  }
  FitOptions threaded = fast;
  threaded.threads = 2;
  EXPECT_DOUBLE_EQ(fit(Graph(2), x, threaded).loglik, a.loglik);
}

TEST(Fit, DensityVanishesOutsideSupport) {
  std::mt19937_64 rng(44);
  auto x = random_sample(7, 2, rng);
  auto r = fit(Graph::complete(2), x);
  EXPECT_EQ(r.density(std::vector<double>{100.0, 0.0}), 0.0);
  EXPECT_GT(r.density(x.points[0]), 0.0);
}

TEST(Fit, InvariantUnderSampleOrder) {
  std::mt19937_64 rng(45);
  auto x = random_sample(8, 3, rng);
  auto r1 = fit(Graph::path(3), x);
  auto pts = x.points;
  std::reverse(pts.begin(), pts.end());
  auto r2 = fit(Graph::path(3), Sample::uniform(pts));
  EXPECT_NEAR(r1.loglik, r2.loglik, 1e-7);
}

TEST(Fit, RandomStartsAgree) {
  std::mt19937_64 rng(46);
  auto x = random_sample(9, 3, rng);
  FitOptions o1, o2;
  o1.random_init_seed = 1;
  o2.random_init_seed = 2;
  auto a = fit(Graph::path(3), x, o1);
  auto b = fit(Graph::path(3), x, o2);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-6);
}

TEST(Fit, WeightsActLikeRepetition) {
  std::mt19937_64 rng(47);
  auto pts = test::random_rational_points(6, 2, 3, 8, rng);
  auto repeated = pts;
  repeated.push_back(pts[0]);
  auto w = std::vector<Rational>(pts.size(), Rational(1));
  w[0] = 2;
  auto a = fit(Graph::complete(2), Sample::uniform(repeated));
  auto b = fit(Graph::complete(2), Sample::weighted(pts, w));
  EXPECT_NEAR(a.loglik, b.loglik, 1e-7);
}

TEST(Fit, OptimumDominatesUniformAndPerturbations) {
  std::mt19937_64 rng(48);
  auto x = random_sample(8, 3, rng);
  Graph g = Graph::path(3);
  auto r = fit(g, x);
  Objective obj(g, x);
  auto y = obj.reduce(r.heights);
  const double best = obj.evaluate(y, false).tau;
  EXPECT_GE(best, obj.evaluate(obj.uniform_heights(), false).tau);
  std::normal_distribution<double> nd(0.0, 1e-2);
  for (int k = 0; k < 100; ++k) {
    auto z = y;
    for (auto& v : z) v += nd(rng);
    EXPECT_GE(best + 1e-9, obj.evaluate(z, false).tau) << k;
  }
}

TEST(Fit, GridQuadratureOfDensity) {
  std::mt19937_64 rng(49);
  auto x = random_sample(10, 2, rng);
  auto r = fit(Graph::complete(2), x);
  double lo[2] = {HUGE_VAL, HUGE_VAL}, hi[2] = {-HUGE_VAL, -HUGE_VAL};
  for (const auto& v : r.support.vertices())
    for (int j = 0; j < 2; ++j) {
      lo[j] = std::min(lo[j], v[j].get_d());
      hi[j] = std::max(hi[j], v[j].get_d());
    }
  const int m = 200;
  const double hx = (hi[0] - lo[0]) / m, hy = (hi[1] - lo[1]) / m;
  double sum = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sum += r.density(std::vector<double>{lo[0] + (i + 0.5) * hx, lo[1] + (j + 0.5) * hy});
  EXPECT_NEAR(sum * hx * hy, 1.0, 2e-2);
}

TEST(Fit, PermutingPointsWithWeights) {
  std::mt19937_64 rng(50);
  auto pts = test::random_rational_points(7, 2, 3, 8, rng);
  std::vector<Rational> w{1, 2, 3, 1, 2, 3, 4};
  auto a = fit(Graph::complete(2), Sample::weighted(pts, w));
  std::vector<std::size_t> perm{3, 0, 6, 2, 5, 1, 4};
  std::vector<RPoint> p2;
  std::vector<Rational> w2;
  for (auto i : perm) {
    p2.push_back(pts[i]);
    w2.push_back(w[i]);
  }
  auto b = fit(Graph::complete(2), Sample::weighted(p2, w2));
  EXPECT_NEAR(a.loglik, b.loglik, 1e-7);
  for (const auto& p : pts) EXPECT_NEAR(a.log_density(p), b.log_density(p), 1e-4);
}
