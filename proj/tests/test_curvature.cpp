#include <gtest/gtest.h>

#include <helfrich/curvature.hpp>
#include <helfrich/shapes.hpp>

using namespace helfrich;

namespace {

double max_relative_deviation(const std::vector<double>& values, double target) {
  double d = 0.0;
  for (double v : values) d = std::max(d, std::abs(v - target) / std::abs(target));
  return d;
}

/// Closed box whose top face is a fine regular grid; interior grid vertices are flat.
MeshVarifold flat_topped_box(int n) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  // top grid z = 0, (n+1)^2 vertices over [0,1]^2
  auto top = [&](int i, int j) { return i * (n + 1) + j; };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) verts.emplace_back(double(i) / n, double(j) / n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      faces.push_back({top(i, j), top(i + 1, j), top(i + 1, j + 1)});
      faces.push_back({top(i, j), top(i + 1, j + 1), top(i, j + 1)});
    }
  // bottom apex closes the boundary loop into a pyramid
  const int apex = static_cast<int>(verts.size());
  verts.emplace_back(0.5, 0.5, -1.0);
  std::vector<int> loop;
  for (int i = 0; i < n; ++i) loop.push_back(top(i, 0));
  for (int j = 0; j < n; ++j) loop.push_back(top(n, j));
  for (int i = n; i > 0; --i) loop.push_back(top(i, n));
  for (int j = n; j > 0; --j) loop.push_back(top(0, j));
  for (std::size_t k = 0; k < loop.size(); ++k) faces.push_back({loop[(k + 1) % loop.size()], loop[k], apex});
  return MeshVarifold(std::move(verts), std::move(faces), 1, 0, 0);
}

}  // namespace

TEST(MeanCurvature, UnitSphere) {
  const auto s = shapes::icosphere(4);
  const auto h = mean_curvature(s);
  EXPECT_LT(max_relative_deviation(h.scalar, -2.0), 0.02);
}

TEST(MeanCurvature, FlatInterior) {
  const int n = 8;
  const auto box = flat_topped_box(n);
  const auto h = mean_curvature(box);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) EXPECT_NEAR(h.scalar[i * (n + 1) + j], 0.0, 1e-6);
}

TEST(MeanCurvature, ScalingLaw) {
  const auto s = shapes::perturb_radially(shapes::icosphere(3), 0.1, shapes::RadialField(3));
  const auto big = shapes::scaled(s, 2.0);
  const auto a = compute_curvature(s), b = compute_curvature(big);
  for (std::size_t v = 0; v < a.size(); ++v) {
    EXPECT_NEAR(b.mean[v], a.mean[v] / 2.0, 1e-12 * std::abs(a.mean[v]));
    EXPECT_NEAR(b.gauss[v], a.gauss[v] / 4.0, 1e-12 * std::abs(a.gauss[v]) + 1e-14);
  }
}

TEST(MeanCurvature, RigidMotionInvariance) {
  const auto s = shapes::perturb_radially(shapes::icosphere(3), 0.1, shapes::RadialField(8));
  const auto m = pushforward(s, Isometry::rotation({1, 2, -1}, 0.9, {0.3, 0, 2}));
  const auto r = pushforward(s, Isometry::reflection({1, 1, 0}, 0.4));
  const auto a = compute_curvature(s), b = compute_curvature(m), c = compute_curvature(r);
  for (std::size_t v = 0; v < a.size(); ++v) {
    EXPECT_NEAR(b.mean[v], a.mean[v], 1e-12 * std::max(1.0, std::abs(a.mean[v])));
    EXPECT_NEAR(c.mean[v], a.mean[v], 1e-12 * std::max(1.0, std::abs(a.mean[v])));
    EXPECT_NEAR(b.gauss[v], a.gauss[v], 1e-12 * std::max(1.0, std::abs(a.gauss[v])));
  }
}

TEST(MeanCurvature, SignFollowsOrientationConvention) {
  const auto s = shapes::icosphere(2, 3.0);
  for (double h : mean_curvature(s).scalar) EXPECT_LT(h, 0.0);
  CurvatureOptions flipped;
  flipped.flip_sign = true;
  for (double h : mean_curvature(s, flipped).scalar) EXPECT_GT(h, 0.0);
}

TEST(GaussCurvature, UnitSphere) {
  const auto s = shapes::icosphere(4);
  EXPECT_LT(max_relative_deviation(gauss_curvature(s), 1.0), 0.03);
}

TEST(GaussCurvature, GaussBonnet) {
  for (const auto& m : {shapes::icosphere(3), shapes::ellipsoid(3, {1, 0.5, 2}),
                        shapes::jitter_radially(shapes::icosphere(3), 0.1, 5)}) {
    EXPECT_NEAR(total_gauss_curvature(compute_curvature(m)), 4 * kPi, 1e-9 * 4 * kPi);
  }
  const auto t = shapes::torus(2.0, 0.6, 40, 16);
  EXPECT_NEAR(total_gauss_curvature(compute_curvature(t)) / (4 * kPi), 0.0, 1e-9);
}

TEST(GaussCurvature, RefinementConvergence) {
  double prev_h = 1e9, prev_k = 1e9;
  for (int level = 2; level <= 5; ++level) {
    const auto f = compute_curvature(shapes::icosphere(level));
    const double eh = max_relative_deviation(f.mean, -2.0), ek = max_relative_deviation(f.gauss, 1.0);
    EXPECT_LT(eh, prev_h) << "level " << level;
    EXPECT_LT(ek, prev_k) << "level " << level;
    prev_h = eh;
    prev_k = ek;
  }
}

TEST(SecondForm, SphereValues) {
  CurvatureField f;
  f.mean_vector = {Vec3(0, 0, -2)};
  f.mean = {-2};
  f.gauss = {1};
  f.area = {1};
  f.defect = {1};
  f.normal = {Vec3(0, 0, 1)};
  const auto q = second_form_quantities(f);
  EXPECT_DOUBLE_EQ(q.second_form_sq[0], 2.0);
  EXPECT_DOUBLE_EQ(q.tensor_sq[0], 4.0);

  f.mean_vector = {Vec3(1, 0, 0)};
  f.gauss = {0};
  EXPECT_DOUBLE_EQ(second_form_quantities(f).second_form_sq[0], 1.0);

  f.gauss = {0.5 + 1e-10};  // within tolerance: clamped
  EXPECT_DOUBLE_EQ(second_form_quantities(f).second_form_sq[0], 0.0);
  f.gauss = {0.6};
  EXPECT_THROW(second_form_quantities(f), DomainError);
}

TEST(SecondForm, UmbilicBoundOnMeshes) {
  for (const auto& m : {shapes::icosphere(3), shapes::ellipsoid(3, {1, 0.7, 1.5})}) {
    const auto f = compute_curvature(m);
    const auto q = second_form_quantities(f);
    for (std::size_t v = 0; v < f.size(); ++v) {
      const double h2 = f.mean_vector[v].squaredNorm();
      EXPECT_GE(q.second_form_sq[v], -second_form_tolerance(h2));
    }
  }
}
