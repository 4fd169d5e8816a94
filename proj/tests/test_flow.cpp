#include <gtest/gtest.h>

#include <helfrich/flow.hpp>
#include <helfrich/shapes.hpp>

using namespace helfrich;

namespace {

HelfrichParams params(double beta, double gamma, double h0, double m0) {
  HelfrichParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.h0 = h0;
  p.m0 = m0;
  return p;
}

MeshVarifold bumpy(int level, std::uint64_t seed, double amplitude = 0.1) {
  return shapes::perturb_radially(shapes::icosphere(level), amplitude, shapes::RadialField(seed));
}

FlowConfig short_run(double tau, int steps) {
  FlowConfig c;
  c.tau = tau;
  c.steps = steps;
  c.optimizer.max_inner_iter = 8;
  return c;
}

double phi(const FlowTrace& t, double w) {
  return t.power == IncrementPower::squared ? w * w : std::pow(w, t.p);
}

}  // namespace

TEST(Diameter, Examples) {
  EXPECT_NEAR(diameter(shapes::icosphere(3)), 2.0, 1e-12);  // icosahedron vertices are antipodal
  EXPECT_EQ(diameter(ParticleVarifold({{Vec3(1, 2, 3), Vec3(0, 0, 1), 1.0}})), 0.0);
  const ParticleVarifold two({{Vec3(0, 0, 0), Vec3(0, 0, 1), 1.0}, {Vec3(0, 7, 0), Vec3(1, 0, 0), 1.0}});
  EXPECT_DOUBLE_EQ(diameter(two), 7.0);
}

TEST(DiameterBounds, UnitSphere) {
  const auto s = shapes::icosphere(4);
  const auto b = diameter_bounds(s, compute_curvature(s));
  EXPECT_NEAR(b.lower, 1.0, 0.02);
  EXPECT_NEAR(b.upper, 8.0, 0.02 * 8);
  EXPECT_LE(b.lower, diameter(s));
  EXPECT_GE(b.upper, diameter(s));
}

TEST(DiameterBounds, CoveredSphere) {
  const double m0 = 10.0;
  for (int k = 1; k <= 3; ++k) {
    const auto s = shapes::covered_sphere(4, m0, k);
    const double r = sphere_radius(k, m0);
    const auto b = diameter_bounds(s, compute_curvature(s));
    EXPECT_NEAR(b.lower, r, 0.02 * r) << k;
    EXPECT_NEAR(b.upper, 8.0 * k * r, 0.02 * 8 * k * r) << k;
    EXPECT_LE(b.lower, 2 * r);
    EXPECT_GE(b.upper, 2 * r);
  }
}

TEST(DiameterBounds, ZeroWillmoreRejected) {
  const auto s = shapes::icosphere(1);
  auto f = compute_curvature(s);
  for (auto& h : f.mean_vector) h.setZero();
  EXPECT_THROW(diameter_bounds(s, f), DomainError);
}

TEST(MetricDerivative, Definition) {
  FlowTrace t;
  t.tau = 0.1;
  t.steps.resize(3);
  for (int n = 0; n < 3; ++n) t.steps[n].step = n;
  t.steps[1].increment = 0.3;
  t.steps[2].increment = 0.2;
  const auto a = estimate_metric_derivative(t);
  ASSERT_EQ(a.speed.size(), 2u);
  EXPECT_DOUBLE_EQ(a.speed[0], 3.0);
  EXPECT_DOUBLE_EQ(a.dissipation[1], (0.09 + 0.04) / 0.2);

  t.tau = 0.2;
  const auto b = estimate_metric_derivative(t);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(b.speed[i], a.speed[i] / 2);

  for (auto& r : t.steps) r.increment = 0.0;
  for (double v : estimate_metric_derivative(t).speed) EXPECT_EQ(v, 0.0);
}

TEST(FlowConfig, Validation) {
  FlowConfig c;
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.tau = -1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.tau = 1e-3;
  c.volume = 1.0;
  c.multiplicity_search = true;
  EXPECT_THROW(c.validate(), DomainError);
  c.multiplicity_search = false;
  c.penalty.volume = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(RunFlow, ZeroStepsGivesInitialRecord) {
  const auto v = bumpy(1, 3);
  auto c = short_run(1e-3, 0);
  const auto r = run_flow(v, c, params(1, 0, 0, mass(v)));
  ASSERT_FALSE(r.error);
  ASSERT_EQ(r.trace.steps.size(), 1u);
  EXPECT_EQ(r.trace.steps[0].step, 0);
  EXPECT_EQ(r.trace.steps[0].outcome, StepOutcome::initial);
  EXPECT_EQ(r.trace.steps[0].increment, 0.0);
  EXPECT_EQ(r.snapshots.size(), 1u);
}

TEST(RunFlow, MassMismatchReported) {
  const auto v = shapes::icosphere(1);
  auto c = short_run(1e-3, 1);
  c.mass = 2 * mass(v);
  const auto r = run_flow(v, c, params(1, 0, 0, mass(v)));
  ASSERT_TRUE(r.error);
  EXPECT_NE(r.error->find("initial mass"), std::string::npos);
}

TEST(IncrementalStep, TinyTauBoundsIncrement) {
  const auto v = bumpy(1, 11);
  const auto p = params(1, -0.5, 0, mass(v));
  const double g = helfrich_energy(v, compute_curvature(v), p).total;
  auto c = short_run(1e-8, 1);
  const auto [next, rec] = incremental_step(v, c, p);
  EXPECT_LE(rec.increment, std::sqrt(2 * c.tau * g));
}

TEST(IncrementalStep, StrictDecreaseOnPerturbedSphere) {
  const auto v = bumpy(2, 5);
  const auto p = params(1, 0, 0, mass(v));
  const double g = helfrich_energy(v, compute_curvature(v), p).total;
  const auto [next, rec] = incremental_step(v, short_run(1e-3, 1), p);
  EXPECT_LT(rec.energy, g - 1e-6 * g);
  EXPECT_EQ(next.faces(), v.faces());
  EXPECT_EQ(next.theta_plus(), v.theta_plus());
  EXPECT_LE(rec.mass_residual, 1e-6 * mass(v));
  EXPECT_NE(rec.outcome, StepOutcome::stalled);
}

TEST(RunFlow, AcceptanceAndDissipation) {
  for (auto power : {IncrementPower::squared, IncrementPower::pth}) {
    const auto v = bumpy(1, 7);
    auto c = short_run(1e-3, 4);
    c.power = power;
    c.transport.p = 1.5;
    const auto r = run_flow(v, c, params(1, -0.5, 0, mass(v)));
    ASSERT_FALSE(r.error) << *r.error;
    const auto& s = r.trace.steps;
    ASSERT_EQ(s.size(), 5u);
    const auto md = estimate_metric_derivative(r.trace);
    const double tol = r.trace.tol_accept;
    for (std::size_t n = 1; n < s.size(); ++n) {
      EXPECT_LE(s[n].energy + phi(r.trace, s[n].increment) / (2 * c.tau), s[n - 1].energy + tol) << n;
      EXPECT_LE(s[n].energy, s[n - 1].energy + tol);
      EXPECT_LE(s[n].energy + md.dissipation[n - 1], s[0].energy + n * tol);
      EXPECT_LE(s[n].mass_residual, 1e-6 * r.trace.m0);
    }
    EXPECT_LT(s.back().energy, s.front().energy);
  }
}

TEST(RunFlow, StationaryAtDiscreteMinimizer) {
  const auto p = params(1, -0.5, -0.5, 4 * kPi);
  const auto start = flow_detail::rescale_to_multiplicity(shapes::icosphere(1), 1, p.m0);
  auto c = short_run(1e-3, 3);
  c.optimizer.max_inner_iter = 20;
  const auto relaxed = relax_energy(start, c, p, 600);
  const auto r = run_flow(relaxed, c, p);
  ASSERT_FALSE(r.error) << *r.error;
  const double e0 = r.trace.steps.front().energy;
  for (const auto& s : r.trace.steps) {
    EXPECT_NEAR(s.energy, e0, 1e-6 * std::abs(e0));
    EXPECT_LE(s.increment, 1e-6 * std::sqrt(p.m0) * s.diameter);
  }
}

TEST(RunFlow, VolumeConstraint) {
  const auto v = bumpy(1, 7);
  auto c = short_run(1e-3, 2);
  c.volume = 0.95 * enclosed_volume(v);
  const auto r = run_flow(v, c, params(1, -0.5, 0, mass(v)));
  ASSERT_FALSE(r.error) << *r.error;
  EXPECT_GT(r.prepass_steps, 0);
  for (const auto& s : r.trace.steps) EXPECT_LE(s.volume_residual, 1e-4 * *c.volume);
  EXPECT_NEAR(enclosed_volume(*r.final_mesh), *c.volume, 1e-4 * *c.volume);
}

TEST(RunFlow, ReflectionSymmetry) {
  const auto v = shapes::perturb_radially(shapes::icosphere(1), 0.1, shapes::RadialField(4, 6, 3.0, Vec3(1, 0, 0)));
  auto c = short_run(1e-3, 2);
  c.symmetry = {Isometry::reflection({1, 0, 0})};
  const auto r = run_flow(v, c, params(1, -0.5, 0, mass(v)));
  ASSERT_FALSE(r.error) << *r.error;
  for (const auto& s : r.trace.steps) EXPECT_LE(s.symmetry_defect, 1e-6 * std::sqrt(r.trace.m0) * s.diameter);
}

TEST(RunFlow, AsymmetricMeshRejectedForSymmetryConstraint) {
  const auto v = bumpy(1, 9);
  auto c = short_run(1e-3, 1);
  c.symmetry = {Isometry::reflection({1, 0, 0})};
  const auto r = run_flow(v, c, params(1, 0, 0, mass(v)));
  ASSERT_TRUE(r.error);
  EXPECT_NE(r.error->find("not symmetric"), std::string::npos);
}

TEST(MultiplicityStep, SingletonMatchesIncrementalStep) {
  const auto v = bumpy(1, 2);
  const auto p = params(1, -0.5, 0, mass(v));
  auto c = short_run(1e-3, 1);
  c.multiplicity_search = true;
  const auto a = multiplicity_step(v, c, p, 1);
  c.multiplicity_search = false;
  const auto [b, rec] = incremental_step(v, c, p);
  EXPECT_EQ(a.chosen, 1);
  EXPECT_EQ(a.record.energy, rec.energy);
  ASSERT_EQ(a.mesh.num_vertices(), b.num_vertices());
  for (std::size_t i = 0; i < b.num_vertices(); ++i) EXPECT_EQ(a.mesh.vertices()[i], b.vertices()[i]);
}

TEST(MultiplicityStep, ThresholdAndJump) {
  // sphere energies 6 pi k: the single sheet is far cheaper than the double one
  const auto p = params(1, -0.5, 0, 4 * kPi);
  const auto v = flow_detail::rescale_to_multiplicity(shapes::icosphere(1), 2, p.m0);
  auto c = short_run(1e-3, 1);
  c.multiplicity_search = true;
  const auto stay = multiplicity_step(v, c, p, 3);
  EXPECT_EQ(stay.chosen, 2);
  EXPECT_GT(stay.record.tau_threshold, c.tau);
  EXPECT_GT(stay.record.multiplicity_gap, 0.0);

  c.tau = 1e3;
  const auto jump = multiplicity_step(v, c, p, 3);
  EXPECT_EQ(jump.chosen, 1);
  EXPECT_NEAR(mass(jump.mesh), p.m0, 1e-6 * p.m0);
  EXPECT_LT(jump.record.energy, stay.record.energy);
}
