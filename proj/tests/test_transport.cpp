#include <gtest/gtest.h>

#include <helfrich/shapes.hpp>
#include <helfrich/transport.hpp>

#include "oracles.hpp"

using namespace helfrich;

namespace {

Atom atom(Vec3 x, Vec3 nu, double w) { return {x, nu.normalized(), w}; }

double brute(const ParticleVarifold& v, const ParticleVarifold& w, double p) {
  std::vector<double> a, b;
  for (const auto& x : v.atoms()) a.push_back(x.w);
  for (const auto& x : w.atoms()) b.push_back(x.w * mass(v) / mass(w));
  return oracle::brute_force_transport(a, b, [&](int i, int j) { return ground_cost(v[i], w[j], p); });
}

}  // namespace

TEST(GroundCost, Examples) {
  const Atom a = atom({0, 0, 0}, {0, 0, 1}, 1);
  EXPECT_DOUBLE_EQ(ground_cost(a, a, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(ground_cost(a, atom({0, 0, 0}, {0, 0, -1}, 1), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(ground_cost(a, atom({3, 4, 0}, {0, 0, 1}, 1), 2.0), 25.0);
}

TEST(Wasserstein, IdenticalIsZeroWithDiagonalPlan) {
  std::mt19937_64 rng(3);
  const auto v = oracle::random_particles(rng, 6, 2.0);
  const auto r = wasserstein(v, v, {});
  EXPECT_NEAR(r.distance, 0.0, 1e-12);
  for (const auto& e : r.plan.entries) EXPECT_EQ(e.i, e.j);
}

TEST(Wasserstein, SingleAtoms) {
  for (double p : {1.0, 2.0, 3.0}) {
    const ParticleVarifold v({atom({0, 0, 0}, {0, 0, 1}, 2.5)});
    const ParticleVarifold w({atom({1, 2, 2}, {1, 0, 0}, 2.5)});
    TransportConfig cfg;
    cfg.p = p;
    const double d = 3.0 + std::sqrt(2.0);
    EXPECT_NEAR(wasserstein(v, w, cfg).distance, std::pow(2.5, 1.0 / p) * d, 1e-12);
  }
}

TEST(Wasserstein, MatchesPolytopeEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 4), n = 1 + static_cast<int>(rng() % 4);
    const auto v = oracle::random_particles(rng, m, 3.0);
    const auto w = oracle::random_particles(rng, n, 3.0);
    const double p = trial % 2 ? 1.0 : 2.0;
    TransportConfig cfg;
    cfg.p = p;
    const auto r = wasserstein(v, w, cfg);
    EXPECT_NEAR(r.plan.cost, brute(v, w, p), 1e-12) << "trial " << trial;
    const auto rows = r.plan.row_sums(), cols = r.plan.col_sums();
    for (int i = 0; i < m; ++i) EXPECT_NEAR(rows[i], v[i].w, 1e-12);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(cols[j], w[j].w, 1e-12);
  }
}

TEST(Wasserstein, DualsAreFeasibleAndTight) {
  std::mt19937_64 rng(5);
  const auto v = oracle::random_particles(rng, 30, 1.0);
  const auto w = oracle::random_particles(rng, 25, 1.0);
  const auto c = varifold_cost_matrix(v, w, 2.0);
  std::vector<double> a, b;
  ot::balanced_weights(v, w, a, b);
  const auto plan = ot::solve_exact(a, b, c);
  double dual = 0.0;
  for (int i = 0; i < c.rows; ++i) {
    dual += a[i] * plan.row_potential[i];
    for (int j = 0; j < c.cols; ++j) EXPECT_GE(c(i, j) - plan.row_potential[i] - plan.col_potential[j], -1e-10);
  }
  for (int j = 0; j < c.cols; ++j) dual += b[j] * plan.col_potential[j];
  EXPECT_NEAR(dual, plan.cost, 1e-10);
}

TEST(Wasserstein, ColumnGenerationMatchesDense) {
  std::mt19937_64 rng(9);
  const auto v = oracle::random_particles(rng, 120, 1.0);
  const auto w = oracle::random_particles(rng, 110, 1.0);
  const auto c = varifold_cost_matrix(v, w, 2.0);
  std::vector<double> a, b;
  ot::balanced_weights(v, w, a, b);
  const auto dense = ot::solve_exact(a, b, c);
  const auto sparse = ot::solve_exact(a, b, c, /*dense_limit=*/0, /*candidates=*/3);
  EXPECT_NEAR(dense.cost, sparse.cost, 1e-12);
}

TEST(Wasserstein, LargeNearDiagonalInstance) {
  const auto mesh = shapes::icosphere(3);
  const auto moved = shapes::perturb_radially(mesh, 0.02, shapes::RadialField(4));
  auto v = sample_particles(mesh);
  auto w = sample_particles(moved);
  w = w.scaled_mass(mass(v) / mass(w));
  const auto r = wasserstein(v, w, {});
  EXPECT_GT(r.distance, 0.0);
  const auto rows = r.plan.row_sums();
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(rows[i], v[i].w, 1e-9 * v[i].w + 1e-15);
}

TEST(Wasserstein, UnequalMassesRejected) {
  const ParticleVarifold v({atom({0, 0, 0}, {0, 0, 1}, 1.0)});
  const ParticleVarifold w({atom({0, 0, 0}, {0, 0, 1}, 1.1)});
  EXPECT_THROW(wasserstein(v, w, {}), DomainError);
  EXPECT_THROW(wasserstein_spatial(v, w, {}), DomainError);
}

TEST(Wasserstein, MassScaling) {
  std::mt19937_64 rng(21);
  const auto v = oracle::random_particles(rng, 7, 1.0);
  const auto w = oracle::random_particles(rng, 5, 1.0);
  for (double p : {1.0, 2.0}) {
    TransportConfig cfg;
    cfg.p = p;
    const double d = wasserstein(v, w, cfg).distance;
    const double d3 = wasserstein(v.scaled_mass(3.0), w.scaled_mass(3.0), cfg).distance;
    EXPECT_NEAR(d3, std::pow(3.0, 1.0 / p) * d, 1e-12);
  }
}

TEST(Wasserstein, IsometryInvariance) {
  std::mt19937_64 rng(2);
  const auto v = oracle::random_particles(rng, 8, 1.0);
  const auto w = oracle::random_particles(rng, 9, 1.0);
  const Isometry g = Isometry::rotation({1, 2, 3}, 0.7, {0.5, -1, 2});
  const Isometry s = Isometry::reflection({0, 1, 1}, 0.3);
  const double d = wasserstein(v, w, {}).distance;
  EXPECT_NEAR(wasserstein(pushforward(v, g), pushforward(w, g), {}).distance, d, 1e-9);
  EXPECT_NEAR(wasserstein(pushforward(v, s), pushforward(w, s), {}).distance, d, 1e-9);
}

TEST(Wasserstein, EntropicConvergesToExact) {
  std::mt19937_64 rng(17);
  const auto v = oracle::random_particles(rng, 10, 1.0);
  const auto w = oracle::random_particles(rng, 10, 1.0);
  const double exact = wasserstein(v, w, {}).distance;
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.1, 0.01, 0.001}) {
    TransportConfig cfg;
    cfg.solver = SolverKind::entropic;
    cfg.epsilon = eps;
    const auto r = wasserstein(v, w, cfg);
    const double err = std::abs(r.distance - exact);
    EXPECT_LE(err, previous + 1e-12);
    previous = err;
    const auto rows = r.plan.row_sums();
    double res = 0.0;
    for (int i = 0; i < 10; ++i) res += std::abs(rows[i] - v[i].w);
    EXPECT_LT(res, cfg.tol);
  }
  EXPECT_LE(previous, 1e-3 * exact);
}

TEST(Wasserstein, EntropicNonConvergenceReported) {
  std::mt19937_64 rng(1);
  const auto v = oracle::random_particles(rng, 10, 1.0);
  const auto w = oracle::random_particles(rng, 10, 1.0);
  TransportConfig cfg;
  cfg.solver = SolverKind::entropic;
  cfg.epsilon = 1e-4;
  cfg.max_iter = 1;
  cfg.tol = 1e-15;
  EXPECT_THROW(wasserstein(v, w, cfg), NumericalError);
}

TEST(WassersteinSpatial, Examples) {
  const ParticleVarifold v({atom({0, 0, 0}, {0, 0, 1}, 1), atom({1, 0, 0}, {0, 1, 0}, 1)});
  const ParticleVarifold w({atom({0, 0, 0}, {1, 0, 0}, 1), atom({1, 0, 0}, {0, 0, -1}, 1)});
  EXPECT_NEAR(wasserstein_spatial(v, w, {}), 0.0, 1e-12);
  EXPECT_GT(wasserstein(v, w, {}).distance, 0.0);

  TransportConfig p1;
  p1.p = 1.0;
  const ParticleVarifold s({atom({0, 0, 0}, {0, 0, 1}, 1)});
  const ParticleVarifold t({atom({3, 4, 0}, {0, 0, 1}, 1)});
  EXPECT_NEAR(wasserstein_spatial(s, t, p1), 5.0, 1e-12);
  EXPECT_NEAR(wasserstein(s, t, p1).distance, 5.0, 1e-12);
}

TEST(WassersteinSpatial, BoundedByFullMetric) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = oracle::random_particles(rng, 6, 1.0);
    const auto w = oracle::random_particles(rng, 7, 1.0);
    EXPECT_LE(wasserstein_spatial(v, w, {}), wasserstein(v, w, {}).distance + 1e-12);
  }
}

TEST(DualCertificate, Examples) {
  const ParticleVarifold v({atom({0, 0, 0}, {0, 0, 1}, 1)});
  const ParticleVarifold w({atom({2.5, 0, 0}, {0, 0, 1}, 1)});
  EXPECT_NEAR(dual_certificate_w1(v, w, [](const Vec3&, const Vec3&) { return 4.0; }), 0.0, 1e-15);
  const double cert = dual_certificate_w1(w, v, [](const Vec3& x, const Vec3&) { return x.x(); });
  TransportConfig p1;
  p1.p = 1.0;
  EXPECT_NEAR(cert, 2.5, 1e-14);
  EXPECT_NEAR(cert, wasserstein(v, w, p1).distance, 1e-12);
}

TEST(DualCertificate, BoundedByW1AndLipschitzChecked) {
  std::mt19937_64 rng(4);
  TransportConfig p1;
  p1.p = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = oracle::random_particles(rng, 5, 1.0);
    const auto w = oracle::random_particles(rng, 5, 1.0);
    const Vec3 dir = oracle::random_unit(rng);
    const auto f = [&](const Vec3& x, const Vec3& nu) { return 0.5 * dir.dot(x) + 0.5 * nu.z(); };
    EXPECT_LE(dual_certificate_w1(v, w, f), wasserstein(v, w, p1).distance + 1e-9);
  }
  const ParticleVarifold v({atom({0, 0, 0}, {0, 0, 1}, 1)});
  const ParticleVarifold w({atom({1, 0, 0}, {0, 0, 1}, 1)});
  EXPECT_THROW(dual_certificate_w1(v, w, [](const Vec3& x, const Vec3&) { return 1.5 * x.x(); }), DomainError);
}

TEST(Wasserstein, MetricAxioms) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const auto u = oracle::random_particles(rng, 5, 1.0);
    const auto v = oracle::random_particles(rng, 6, 1.0);
    const auto w = oracle::random_particles(rng, 4, 1.0);
    const double uv = wasserstein(u, v, {}).distance, vw = wasserstein(v, w, {}).distance,
                 uw = wasserstein(u, w, {}).distance;
    EXPECT_NEAR(uv, wasserstein(v, u, {}).distance, 1e-9);
    EXPECT_LE(uw, uv + vw + 1e-9);
  }
}
