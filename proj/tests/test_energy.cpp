#include <gtest/gtest.h>

#include <random>

#include <helfrich/energy.hpp>
#include <helfrich/shapes.hpp>

using namespace helfrich;

namespace {

// Energy of the k-covered round sphere from the geometry directly: radius from
// the mass, then k * area * [beta/2 (H - H0)^2] + k * gamma * 4 pi with H = -2/R.
double sphere_energy_oracle(int k, const HelfrichParams& p) {
  const double r = std::sqrt(p.m0 / (4 * kPi * k));
  const double h = -2.0 / r;
  return k * (4 * kPi * r * r * 0.5 * p.beta * (h - p.h0) * (h - p.h0) + p.gamma * 4 * kPi);
}

HelfrichParams params(double beta, double gamma, double h0, double m0 = 4 * kPi) {
  HelfrichParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.h0 = h0;
  p.m0 = m0;
  return p;
}

std::vector<MeshVarifold> corpus() {
  return {shapes::icosphere(3),
          shapes::icosphere(3, 1.0, 2, 0),
          shapes::ellipsoid(3, {1, 1, 2}),
          shapes::ellipsoid(3, {0.6, 1, 1.4}, 3, 0),
          shapes::perturb_radially(shapes::icosphere(3), 0.15, shapes::RadialField(4)),
          shapes::jitter_radially(shapes::icosphere(2), 0.05, 11),
          shapes::torus(2.0, 0.7, 32, 16)};
}

}  // namespace

TEST(HelfrichEnergy, UnitSphere) {
  const auto s = shapes::icosphere(4);
  const auto f = compute_curvature(s);
  const auto e = helfrich_energy(s, f, params(1, 0, 0));
  EXPECT_NEAR(e.total, 8 * kPi, 0.02 * 8 * kPi);
  EXPECT_NEAR(helfrich_energy(s, f, params(0.5, 0, 0)).willmore, 4 * kPi, 0.02 * 4 * kPi);
  EXPECT_NEAR(e.total, e.bending + e.gauss + e.cross, 1e-12 * std::abs(e.total));
}

TEST(HelfrichEnergy, LinearInMultiplicity) {
  const auto s = shapes::ellipsoid(3, {1, 0.8, 1.3});
  const auto f = compute_curvature(s);
  const auto p = params(1, -0.4, -0.7);
  const auto a = helfrich_energy(s, f, p), b = helfrich_energy(s.with_multiplicity(2, 0), f, p);
  EXPECT_DOUBLE_EQ(b.bending, 2 * a.bending);
  EXPECT_DOUBLE_EQ(b.gauss, 2 * a.gauss);
  EXPECT_DOUBLE_EQ(b.cross, 2 * a.cross);
  EXPECT_DOUBLE_EQ(b.willmore, 2 * a.willmore);
}

TEST(HelfrichEnergy, SingleSheetIdentity) {
  // for theta- = 0 the expanded form equals k * sum a [(beta/2)(H-H0)^2 + gamma K]
  const auto p = params(1.3, -0.6, 0.8);
  for (const auto& m : corpus()) {
    if (m.orientation_density() != m.multiplicity()) continue;
    const auto f = compute_curvature(m);
    const auto integrand = [&](const Vec3&, const Vec3&, double h, double k) {
      return 0.5 * p.beta * (h - p.h0) * (h - p.h0) + p.gamma * k;
    };
    const double total = helfrich_energy(m, f, p).total;
    EXPECT_NEAR(generic_energy(m, f, integrand), total, 1e-12 * std::abs(total));
  }
}

TEST(HelfrichEnergy, OrientationFlip) {
  const auto p = params(1, -0.3, 0.9);
  auto q = p;
  q.h0 = -p.h0;
  for (const auto& m : corpus()) {
    const auto f = compute_curvature(m);
    const auto flipped = m.with_multiplicity(m.theta_minus(), m.theta_plus());
    const double a = helfrich_energy(m, f, p).total, b = helfrich_energy(flipped, f, q).total;
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
  }
}

TEST(HelfrichEnergy, GaussTermQuantized) {
  const auto p = params(1, -0.7, 0.2);
  for (const auto& m : corpus()) {
    const auto e = helfrich_energy(m, compute_curvature(m), p);
    const double expected = p.gamma * 4 * kPi * (1 - m.genus()) * m.multiplicity();
    EXPECT_NEAR(e.gauss, expected, 1e-9 * 4 * kPi * m.multiplicity());
  }
}

TEST(HelfrichEnergy, RigidMotionInvariance) {
  const auto m = shapes::perturb_radially(shapes::icosphere(3), 0.1, shapes::RadialField(21));
  const auto moved = pushforward(m, Isometry::rotation({0.2, 1, -0.5}, 2.2, {1, -1, 0}));
  const auto p = params(1, -0.5, -0.8);
  const auto a = helfrich_energy(m, compute_curvature(m), p);
  const auto b = helfrich_energy(moved, compute_curvature(moved), p);
  EXPECT_NEAR(a.total, b.total, 1e-12 * std::abs(a.total));
  EXPECT_NEAR(a.willmore, b.willmore, 1e-12 * a.willmore);
}

TEST(WillmoreEnergy, LiYau) {
  for (const auto& m : corpus()) {
    const double w = willmore_energy(m, compute_curvature(m));
    EXPECT_GE(w, 4 * kPi * m.multiplicity() * 0.98);
  }
  const auto covered = shapes::covered_sphere(4, 1.0, 3);
  EXPECT_NEAR(willmore_energy(covered, compute_curvature(covered)), 12 * kPi, 0.02 * 12 * kPi);
}

TEST(GenericEnergy, Reproductions) {
  const auto m = shapes::ellipsoid(3, {1, 1, 2}, 2, 1);
  const auto f = compute_curvature(m);
  const double one = generic_energy(m, f, [](const Vec3&, const Vec3&, double, double) { return 1.0; });
  EXPECT_NEAR(one, mass(m), 1e-12 * mass(m));
  const double quarter = generic_energy(m, f, [](const Vec3&, const Vec3&, double h, double) { return 0.25 * h * h; });
  const double w = willmore_energy(m, f);
  EXPECT_NEAR(quarter, w, 1e-12 * w);
  const auto bad = [](const Vec3&, const Vec3&, double, double) { return std::nan(""); };
  EXPECT_THROW(generic_energy(m, f, bad), DomainError);
}

TEST(LowerBound, EqualityWithoutSpontaneousCurvature) {
  const auto p = params(1.7, 0, 0);
  for (const auto& m : corpus()) {
    const auto f = compute_curvature(m);
    const double total = helfrich_energy(m, f, p).total;
    EXPECT_NEAR(lower_bound_certificate(m, f, p), total, 1e-12 * total);
    EXPECT_NEAR(total, 2 * p.beta * willmore_energy(m, f), 1e-12 * total);
  }
}

TEST(LowerBound, SphereEqualityCase) {
  // the icosahedron has equal mean curvature at every vertex, which is what
  // makes the Cauchy-Schwarz step tight
  const auto s = shapes::icosphere(0);
  const auto f = compute_curvature(s);
  const auto p = params(1, -0.5, -2);
  const double total = helfrich_energy(s, f, p).total;
  EXPECT_NEAR(lower_bound_certificate(s, f, p), total, 1e-9 * std::abs(total));
}

TEST(LowerBound, HoldsOnCorpus) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> beta(0.2, 2.0), gamma(-1.0, 0.5), h0(-3.0, 3.0);
  for (const auto& m : corpus()) {
    const auto f = compute_curvature(m);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = params(beta(rng), gamma(rng), h0(rng), mass(m));
      const double total = helfrich_energy(m, f, p).total;
      EXPECT_GE(total - lower_bound_certificate(m, f, p), -1e-9 * std::abs(total));
    }
  }
}

TEST(SphereEnergy, Examples) {
  EXPECT_NEAR(sphere_energy(1, params(1, 0, 0)), 8 * kPi, 1e-12);
  for (int k = 1; k <= 6; ++k) {
    EXPECT_NEAR(sphere_energy(k, params(0.5, 0, 0, 3.7)), 4 * kPi * k, 1e-12 * k);
    const auto p = params(1, -2, -0.6, 5.0);
    const double r1 = std::sqrt(p.m0 / (4 * kPi));
    EXPECT_NEAR(sphere_energy(k, p), 2 * p.beta * p.m0 * (p.h0 * std::sqrt(k) / r1 + p.h0 * p.h0 / 4), 1e-12);
  }
  EXPECT_THROW(sphere_energy(0, params(1, 0, 0)), DomainError);
}

TEST(SphereEnergy, MatchesGeometry) {
  for (const auto& p : {params(1, 0, 0), params(1, -0.5, -1), params(0.5, 0, 0), params(2, -1, 1.5, 7)})
    for (int k = 1; k <= 5; ++k) EXPECT_NEAR(sphere_energy(k, p), sphere_energy_oracle(k, p), 1e-12 * std::abs(sphere_energy_oracle(k, p)) + 1e-12);
}

TEST(SphereEnergy, DiscreteSpheres) {
  for (const auto& p : {params(1, 0, 0), params(1, -0.5, -1), params(0.5, 0, 0)})
    for (int k = 1; k <= 3; ++k) {
      const auto s = shapes::covered_sphere(4, p.m0, k);
      const auto e = helfrich_energy(s, compute_curvature(s), p);
      const double want = sphere_energy(k, p);
      // the terms can cancel exactly (k=1, gamma=-0.5, H0=-1), so measure against the largest term
      const double scale = std::max({std::abs(want), std::abs(e.bending), std::abs(e.gauss), std::abs(e.cross)});
      EXPECT_NEAR(e.total, want, 0.02 * scale) << "k=" << k;
    }
}

TEST(OptimalSphere, Examples) {
  auto a = optimal_sphere(params(1, 0, -1, 16 * kPi));
  EXPECT_NEAR(a.k_star, 1.0, 1e-12);
  EXPECT_EQ(a.best(), 1);
  // -H0 = 1 > sqrt(16 pi / 64 pi), so this one takes the brute-force path
  auto b = optimal_sphere(params(1, 0, -1, 64 * kPi));
  EXPECT_NEAR(b.k_star, 4.0, 1e-12);
  EXPECT_EQ(b.best(), 4);
  EXPECT_FALSE(b.hypotheses_hold);
  for (double g : {0.0, -0.5, -1.9}) {
    auto c = optimal_sphere(params(1.3, g, 0, 2.0));
    EXPECT_EQ(c.k_star, 0.0);
    EXPECT_EQ(c.best(), 1);
  }
  // exact interior minimizer inside the hypotheses: slope 1/4 (gamma = -1.5)
  // gives k_star = 16 * m0 H0^2/(16 pi); m0 = 4 pi, H0 = -1 -> 4
  auto d = optimal_sphere(params(1, -1.5, -1, 4 * kPi));
  EXPECT_TRUE(d.hypotheses_hold);
  EXPECT_EQ(d.branch, SphereAnalytics::Branch::integer);
  EXPECT_EQ(d.best(), 4);
  EXPECT_THROW(optimal_sphere(params(1, -2, -1)), DomainError);
}

TEST(OptimalSphere, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = 0.2 + 2 * u(rng);
    const double gamma = -2 * beta * 0.95 * u(rng);
    const double m0 = 0.5 + 50 * u(rng);
    const double h0 = -std::sqrt(16 * kPi / m0) * u(rng);
    const auto p = params(beta, gamma, h0, m0);
    const auto s = optimal_sphere(p);
    ASSERT_TRUE(s.hypotheses_hold);
    int best = 1;
    double best_e = sphere_energy_oracle(1, p);
    for (int k = 2; k <= 1000; ++k) {
      const double e = sphere_energy_oracle(k, p);
      if (e < best_e) {
        best_e = e;
        best = k;
      }
    }
    const double got = sphere_energy_oracle(s.best(), p);
    EXPECT_NEAR(got, best_e, 1e-12 * std::abs(best_e) + 1e-12) << "trial " << trial << " k=" << s.best() << " vs " << best;
    for (const auto& [k, e] : s.energies) EXPECT_LE(s.energies.at(s.best()), e + 1e-12 * std::abs(e));
  }
}

TEST(OptimalSphere, OutsideHypothesesWarns) {
  const auto s = optimal_sphere(params(1, 0.3, 0.5));
  EXPECT_FALSE(s.hypotheses_hold);
  EXPECT_FALSE(s.warning.empty());
  EXPECT_EQ(s.branch, SphereAnalytics::Branch::brute_force);
  EXPECT_EQ(s.best(), 1);
}

TEST(MultiplicityBound, Example) {
  EXPECT_EQ(multiplicity_bound(8 * kPi, params(1, -0.5, 0), 0), 3);
}

TEST(MultiplicityBound, Hypotheses) {
  EXPECT_THROW(multiplicity_bound(10, params(1, 0, 0)), DomainError);
  EXPECT_THROW(multiplicity_bound(10, params(1, -2.5, 0)), DomainError);
  EXPECT_THROW(multiplicity_bound(10, params(1, -2.5, 0), 0), DomainError);
  // for genus >= 2 the condition holds for every gamma < 0
  EXPECT_NO_THROW(multiplicity_bound(10, params(1, -2.5, 0), 3));
}

TEST(MultiplicityBound, Monotone) {
  const auto p = params(1, -0.6, -0.4);
  int prev = 0;
  for (double f = 1; f < 400; f *= 1.3) {
    const int k = multiplicity_bound(f, p);
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(MultiplicityBound, BoundsCoveredMeshes) {
  const auto p = params(1, -0.5, -0.5);
  for (const auto& base : corpus())
    for (int k = 1; k <= 3; ++k) {
      const auto m = base.with_multiplicity(k, 0);
      auto q = p;
      q.m0 = mass(m);
      const double f = helfrich_energy(m, compute_curvature(m), q).total;
      EXPECT_LE(k, multiplicity_bound(f, q, m.genus()));
      EXPECT_LE(k, multiplicity_bound(f, q));
    }
}
