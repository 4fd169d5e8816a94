#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>

#include "varifold.hpp"

namespace helfrich::shapes {

/// Portable uniform double in [0,1) from a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct TriangleSoup {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

/// Subdivided icosahedron projected to the sphere. Level 0 has 12
/// vertices/20 faces; every level multiplies the face count by 4. The
/// vertex set is invariant under the coordinate reflections.
inline TriangleSoup icosphere_soup(int subdivisions, double radius = 1.0) {
  if (subdivisions < 0) throw DomainError("subdivision level must be >= 0");
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleSoup s;
  s.vertices = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : s.vertices) v.normalize();
  s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      s.vertices.push_back((s.vertices[a] + s.vertices[b]).normalized());
      const int id = static_cast<int>(s.vertices.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(s.faces.size() * 4);
    for (const Face& f : s.faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    s.faces = std::move(next);
  }
  for (auto& v : s.vertices) v *= radius;
  return s;
}

inline MeshVarifold icosphere(int subdivisions, double radius = 1.0, int theta_plus = 1, int theta_minus = 0,
                              const Vec3& center = Vec3::Zero()) {
  auto s = icosphere_soup(subdivisions, radius);
  for (auto& v : s.vertices) v += center;
  return MeshVarifold(std::move(s.vertices), std::move(s.faces), theta_plus, theta_minus, 0);
}

/// Icosphere whose multiplicity-weighted area equals `mass`.
inline MeshVarifold covered_sphere(int subdivisions, double mass, int k) {
  auto unit = icosphere_soup(subdivisions, 1.0);
  MeshVarifold probe(unit.vertices, unit.faces, k, 0, 0);
  const double scale = std::sqrt(mass / helfrich::mass(probe));
  for (auto& v : unit.vertices) v *= scale;
  return MeshVarifold(std::move(unit.vertices), std::move(unit.faces), k, 0, 0);
}

inline MeshVarifold ellipsoid(int subdivisions, const Vec3& semi_axes, int theta_plus = 1, int theta_minus = 0) {
  auto s = icosphere_soup(subdivisions, 1.0);
  for (auto& v : s.vertices) v = v.cwiseProduct(semi_axes);
  return MeshVarifold(std::move(s.vertices), std::move(s.faces), theta_plus, theta_minus, 0);
}

/// Torus of revolution about the z axis, genus 1.
inline MeshVarifold torus(double major_radius, double minor_radius, int n_major, int n_minor, int theta_plus = 1,
                          int theta_minus = 0) {
  if (!(major_radius > minor_radius && minor_radius > 0.0)) throw DomainError("torus needs R > r > 0");
  if (n_major < 3 || n_minor < 3) throw DomainError("torus resolution must be >= 3");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (int i = 0; i < n_major; ++i) {
    const double u = 2.0 * kPi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double w = 2.0 * kPi * j / n_minor;
      const double rho = major_radius + minor_radius * std::cos(w);
      verts.emplace_back(rho * std::cos(u), rho * std::sin(u), minor_radius * std::sin(w));
    }
  }
  auto id = [&](int i, int j) { return ((i % n_major) * n_minor) + (j % n_minor); };
  for (int i = 0; i < n_major; ++i)
    for (int j = 0; j < n_minor; ++j) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  return MeshVarifold(std::move(verts), std::move(faces), theta_plus, theta_minus, 1);
}

/// Smooth random radial field on the unit sphere with max |value| = 1:
/// a sum of a few random plane waves. If `symmetric_normal` is nonzero the
/// field is made even under reflection across the plane through the origin
/// with that normal.
class RadialField {
 public:
  RadialField(std::uint64_t seed, int waves = 6, double max_frequency = 3.0, Vec3 symmetric_normal = Vec3::Zero())
      : mirror_(symmetric_normal.norm() > 0 ? Mat3(Mat3::Identity() - 2.0 * symmetric_normal.normalized() *
                                                                          symmetric_normal.normalized().transpose())
                                            : Mat3::Identity()),
        use_mirror_(symmetric_normal.norm() > 0) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < waves; ++i) {
      Vec3 k(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
      k = k.normalized() * (1.0 + (max_frequency - 1.0) * uniform01(rng));
      waves_.push_back({k, 2 * kPi * uniform01(rng), 2 * uniform01(rng) - 1});
    }
    // normalize on a dense sample of the sphere
    const auto probe = icosphere_soup(4);
    double peak = 0.0;
    for (const auto& x : probe.vertices) peak = std::max(peak, std::abs(raw(x)));
    scale_ = peak > 0 ? 1.0 / peak : 0.0;
  }

  double operator()(const Vec3& unit_direction) const { return scale_ * raw(unit_direction); }

 private:
  struct Wave {
    Vec3 k;
    double phase;
    double amplitude;
  };
  double raw_one(const Vec3& x) const {
    double s = 0.0;
    for (const Wave& w : waves_) s += w.amplitude * std::cos(w.k.dot(x) + w.phase);
    return s;
  }
  double raw(const Vec3& x) const { return use_mirror_ ? 0.5 * (raw_one(x) + raw_one(mirror_ * x)) : raw_one(x); }

  std::vector<Wave> waves_;
  Mat3 mirror_;
  bool use_mirror_;
  double scale_ = 1.0;
};

/// Radially perturbs a star-shaped mesh about `center`: x -> center + (1 + amplitude*field(dir)) (x - center).
inline MeshVarifold perturb_radially(const MeshVarifold& v, double amplitude, const RadialField& field,
                                     const Vec3& center = Vec3::Zero()) {
  std::vector<Vec3> out;
  out.reserve(v.num_vertices());
  for (const Vec3& x : v.vertices()) {
    const Vec3 r = x - center;
    out.push_back(center + (1.0 + amplitude * field(r.normalized())) * r);
  }
  return v.with_vertices(std::move(out));
}

/// Independent uniform radial noise in [-amplitude, amplitude] per vertex.
inline MeshVarifold jitter_radially(const MeshVarifold& v, double amplitude, std::uint64_t seed,
                                    const Vec3& center = Vec3::Zero()) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  out.reserve(v.num_vertices());
  for (const Vec3& x : v.vertices()) out.push_back(center + (1.0 + amplitude * (2 * uniform01(rng) - 1)) * (x - center));
  return v.with_vertices(std::move(out));
}

/// Uniform scaling about the vertex centroid.
inline MeshVarifold scaled(const MeshVarifold& v, double factor) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& x : v.vertices()) c += x;
  c /= static_cast<double>(v.num_vertices());
  std::vector<Vec3> out;
  out.reserve(v.num_vertices());
  for (const Vec3& x : v.vertices()) out.push_back(c + factor * (x - c));
  return v.with_vertices(std::move(out));
}

}  // namespace helfrich::shapes
