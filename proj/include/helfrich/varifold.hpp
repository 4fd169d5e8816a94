#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace helfrich {

using Face = std::array<int, 3>;

/// Connectivity of a closed, consistently oriented triangle mesh.
/// Shared between meshes that differ only in vertex positions.
struct MeshTopology {
  std::vector<Face> faces;
  int num_vertices = 0;
  int num_edges = 0;
  std::vector<std::vector<int>> vertex_faces;      // incident faces per vertex
  std::vector<std::vector<int>> vertex_neighbors;  // sorted one-ring vertices

  int euler_characteristic() const { return num_vertices - num_edges + static_cast<int>(faces.size()); }

  static std::shared_ptr<const MeshTopology> build(int num_vertices, std::vector<Face> faces) {
    if (num_vertices <= 0 || faces.empty()) throw DomainError("mesh is empty");
    auto topo = std::make_shared<MeshTopology>();
    topo->num_vertices = num_vertices;
    topo->vertex_faces.assign(num_vertices, {});
    topo->vertex_neighbors.assign(num_vertices, {});

    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(faces.size() * 3);
    auto key = [](int a, int b) {
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    };
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const Face& t = faces[f];
      for (int c = 0; c < 3; ++c) {
        if (t[c] < 0 || t[c] >= num_vertices)
          throw DomainError(detail::concat("face ", f, " references vertex ", t[c], " out of range"));
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
        throw DomainError(detail::concat("face ", f, " repeats a vertex"));
      for (int c = 0; c < 3; ++c) {
        const int a = t[c], b = t[(c + 1) % 3];
        if (!directed.emplace(key(a, b), static_cast<int>(f)).second)
          throw DomainError(detail::concat("mesh not orientable or not manifold: directed edge (", a, ",", b,
                                           ") used twice"));
        topo->vertex_faces[a].push_back(static_cast<int>(f));
        topo->vertex_neighbors[a].push_back(b);
        topo->vertex_neighbors[b].push_back(a);
      }
    }
    for (const auto& [k, f] : directed) {
      const int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
      if (!directed.count(key(b, a)))
        throw DomainError(detail::concat("mesh not closed: edge (", a, ",", b, ") of face ", f,
                                         " has no opposite"));
    }
    topo->num_edges = static_cast<int>(directed.size() / 2);
    for (int v = 0; v < num_vertices; ++v) {
      auto& nb = topo->vertex_neighbors[v];
      if (nb.empty()) throw DomainError(detail::concat("vertex ", v, " is not referenced by any face"));
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    topo->faces = std::move(faces);
    return topo;
  }
};

inline Vec3 face_cross(const Vec3& a, const Vec3& b, const Vec3& c) { return (b - a).cross(c - a); }

/// Closed oriented triangle mesh carrying constant multiplicities
/// (theta_plus copies with the outward normal, theta_minus with the inward one).
class MeshVarifold {
 public:
  struct Options {
    bool orient_outward = true;  // flip winding when the geometric signed volume is negative
  };

  MeshVarifold(std::vector<Vec3> vertices, std::vector<Face> faces, int theta_plus, int theta_minus, int genus)
      : MeshVarifold(std::move(vertices), std::move(faces), theta_plus, theta_minus, genus, Options{}) {}

  MeshVarifold(std::vector<Vec3> vertices, std::vector<Face> faces, int theta_plus, int theta_minus, int genus,
               Options opts)
      : vertices_(std::move(vertices)), theta_plus_(theta_plus), theta_minus_(theta_minus), genus_(genus) {
    if (theta_plus < 0 || theta_minus < 0) throw DomainError("multiplicities must be non-negative");
    if (theta_plus + theta_minus < 1) throw DomainError("theta_plus + theta_minus must be >= 1");
    if (genus < 0) throw DomainError("genus must be non-negative");
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      if (!vertices_[i].allFinite()) throw DomainError(detail::concat("vertex ", i, " is not finite"));
    topo_ = MeshTopology::build(static_cast<int>(vertices_.size()), std::move(faces));
    const int chi = topo_->euler_characteristic();
    if (chi != 2 - 2 * genus)
      throw DomainError(detail::concat("Euler characteristic ", chi, " does not match genus ", genus,
                                       " (expected ", 2 - 2 * genus, ")"));
    check_face_areas();
    if (opts.orient_outward && geometric_volume() < 0.0) {
      std::vector<Face> flipped = topo_->faces;
      for (auto& f : flipped) std::swap(f[1], f[2]);
      topo_ = MeshTopology::build(static_cast<int>(vertices_.size()), std::move(flipped));
    }
  }

  std::span<const Vec3> vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return topo_->faces; }
  const MeshTopology& topology() const { return *topo_; }
  int theta_plus() const { return theta_plus_; }
  int theta_minus() const { return theta_minus_; }
  int multiplicity() const { return theta_plus_ + theta_minus_; }
  int orientation_density() const { return theta_plus_ - theta_minus_; }
  int genus() const { return genus_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return topo_->faces.size(); }

  /// Same connectivity and multiplicities, new positions. Faces whose area
  /// collapses are reported by index.
  MeshVarifold with_vertices(std::vector<Vec3> vertices) const {
    if (vertices.size() != vertices_.size()) throw DomainError("vertex count mismatch");
    MeshVarifold out(*this);
    out.vertices_ = std::move(vertices);
    for (std::size_t i = 0; i < out.vertices_.size(); ++i)
      if (!out.vertices_[i].allFinite()) throw NumericalError(detail::concat("vertex ", i, " is not finite"));
    out.check_face_areas();
    return out;
  }

  MeshVarifold with_multiplicity(int theta_plus, int theta_minus) const {
    if (theta_plus < 0 || theta_minus < 0 || theta_plus + theta_minus < 1)
      throw DomainError("invalid multiplicities");
    MeshVarifold out(*this);
    out.theta_plus_ = theta_plus;
    out.theta_minus_ = theta_minus;
    return out;
  }

  double face_area(std::size_t f) const {
    const Face& t = topo_->faces[f];
    return 0.5 * face_cross(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]).norm();
  }

  Vec3 face_normal(std::size_t f) const {
    const Face& t = topo_->faces[f];
    return face_cross(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]).normalized();
  }

  double surface_area() const {
    double a = 0.0;
    for (std::size_t f = 0; f < num_faces(); ++f) a += face_area(f);
    return a;
  }

  /// Signed volume of the geometry alone (no multiplicity factor).
  double geometric_volume() const {
    double v = 0.0;
    for (const Face& t : topo_->faces) v += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
    return v / 6.0;
  }

 private:
  void check_face_areas() const {
    const std::size_t nf = topo_->faces.size();
    std::vector<double> areas(nf);
    double total = 0.0;
    for (std::size_t f = 0; f < nf; ++f) total += (areas[f] = face_area(f));
    const double threshold = 1e-14 * total / static_cast<double>(nf);
    for (std::size_t f = 0; f < nf; ++f)
      if (!(areas[f] >= threshold) || areas[f] == 0.0)
        throw DomainError(detail::concat("degenerate face ", f, " (area ", areas[f], ")"));
  }

  std::vector<Vec3> vertices_;
  std::shared_ptr<const MeshTopology> topo_;
  int theta_plus_ = 1;
  int theta_minus_ = 0;
  int genus_ = 0;
};

struct Atom {
  Vec3 x;
  Vec3 nu;
  double w = 0.0;
};

/// Weighted Dirac atoms on R^3 x S^2.
class ParticleVarifold {
 public:
  explicit ParticleVarifold(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("particle varifold is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& a = atoms_[i];
      if (!a.x.allFinite() || !a.nu.allFinite() || !std::isfinite(a.w))
        throw DomainError(detail::concat("atom ", i, " is not finite"));
      if (std::abs(a.nu.norm() - 1.0) > 1e-12)
        throw DomainError(detail::concat("atom ", i, " normal is not unit (|nu|=", a.nu.norm(), ")"));
      if (!(a.w > 0.0)) throw DomainError(detail::concat("atom ", i, " weight must be positive"));
      total += a.w;
    }
    if (!(total > 0.0)) throw DomainError("total mass must be positive");
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  /// Multiplies every weight by `factor` (> 0).
  ParticleVarifold scaled_mass(double factor) const {
    if (!(factor > 0.0)) throw DomainError("mass scale factor must be positive");
    std::vector<Atom> out = atoms_;
    for (auto& a : out) a.w *= factor;
    return ParticleVarifold(std::move(out));
  }

 private:
  std::vector<Atom> atoms_;
};

/// x -> linear * x + translation, nu -> linear * nu.
struct Isometry {
  Mat3 linear = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const {
    const double dev = (linear.transpose() * linear - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(dev <= 1e-12)) throw DomainError(detail::concat("isometry linear part is not orthogonal (deviation ", dev, ")"));
    if (!translation.allFinite()) throw DomainError("isometry translation is not finite");
  }

  bool is_reflection() const { return linear.determinant() < 0.0; }
  Vec3 apply_point(const Vec3& x) const { return linear * x + translation; }

  static Isometry identity() { return {}; }

  /// Reflection across the plane {x : n.x = offset}.
  static Isometry reflection(Vec3 normal, double offset = 0.0) {
    normal.normalize();
    Isometry g;
    g.linear = Mat3::Identity() - 2.0 * normal * normal.transpose();
    g.translation = 2.0 * offset * normal;
    return g;
  }

  /// Rotation by `angle` about the line through `center` with direction `axis`.
  static Isometry rotation(const Vec3& axis, double angle, const Vec3& center = Vec3::Zero()) {
    Isometry g;
    g.linear = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    g.translation = center - g.linear * center;
    return g;
  }

  static Isometry translation_by(const Vec3& t) {
    Isometry g;
    g.translation = t;
    return g;
  }
};

// ---------------------------------------------------------------------------
// Functionals

inline double mass(const MeshVarifold& v) { return v.multiplicity() * v.surface_area(); }

inline double mass(const ParticleVarifold& v) {
  double m = 0.0;
  for (const Atom& a : v.atoms()) m += a.w;
  return m;
}

/// (1/3) * integral of x.nu; for a mesh the face quadrature is exact and
/// reduces to the signed tetrahedron sum, times (theta_plus - theta_minus).
inline double enclosed_volume(const MeshVarifold& v) { return v.orientation_density() * v.geometric_volume(); }

inline double enclosed_volume(const ParticleVarifold& v) {
  double s = 0.0;
  for (const Atom& a : v.atoms()) s += a.w * a.x.dot(a.nu);
  return s / 3.0;
}

inline ParticleVarifold pushforward(const ParticleVarifold& v, const Isometry& g) {
  g.validate();
  std::vector<Atom> out;
  out.reserve(v.size());
  for (const Atom& a : v.atoms()) out.push_back({g.apply_point(a.x), (g.linear * a.nu).normalized(), a.w});
  return ParticleVarifold(std::move(out));
}

/// Rigid image of a mesh; reflections reverse the winding so the normal
/// field stays outward.
inline MeshVarifold pushforward(const MeshVarifold& v, const Isometry& g) {
  g.validate();
  std::vector<Vec3> verts;
  verts.reserve(v.num_vertices());
  for (const Vec3& x : v.vertices()) verts.push_back(g.apply_point(x));
  std::vector<Face> faces = v.faces();
  if (g.is_reflection())
    for (auto& f : faces) std::swap(f[1], f[2]);
  return MeshVarifold(std::move(verts), std::move(faces), v.theta_plus(), v.theta_minus(), v.genus(),
                      {.orient_outward = false});
}

// ---------------------------------------------------------------------------
// Sampling

enum class QuadratureRule {
  centroid,    // one node per face
  three_point  // degree-2 rule, nodes at barycentric (2/3, 1/6, 1/6)
};

/// Which face/node/sheet an atom came from.
struct AtomSource {
  int face = 0;
  int node = 0;
  int sign = 1;  // +1: outward sheet (theta_plus), -1: inward sheet (theta_minus)
};

struct SampledParticles {
  ParticleVarifold particles;
  std::vector<AtomSource> sources;
};

inline SampledParticles sample_particles_traced(const MeshVarifold& v, QuadratureRule rule = QuadratureRule::centroid) {
  static const double kCentroid[1][3] = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  static const double kThree[3][3] = {
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
  const int nodes = rule == QuadratureRule::centroid ? 1 : 3;
  const auto& bary = rule == QuadratureRule::centroid ? kCentroid : kThree;

  std::vector<Atom> atoms;
  std::vector<AtomSource> sources;
  const int sheets = (v.theta_plus() > 0) + (v.theta_minus() > 0);
  atoms.reserve(v.num_faces() * nodes * sheets);
  sources.reserve(atoms.capacity());
  const auto verts = v.vertices();
  for (std::size_t f = 0; f < v.num_faces(); ++f) {
    const Face& t = v.faces()[f];
    const Vec3 n = face_cross(verts[t[0]], verts[t[1]], verts[t[2]]);
    const double area = 0.5 * n.norm();
    if (!(area > 0.0)) throw DomainError(detail::concat("degenerate face ", f, " (zero area)"));
    const Vec3 nu = n / (2.0 * area);
    for (int q = 0; q < nodes; ++q) {
      const Vec3 x = bary[q][0] * verts[t[0]] + bary[q][1] * verts[t[1]] + bary[q][2] * verts[t[2]];
      const double share = area / nodes;
      if (v.theta_plus() > 0) {
        atoms.push_back({x, nu, share * v.theta_plus()});
        sources.push_back({static_cast<int>(f), q, +1});
      }
      if (v.theta_minus() > 0) {
        atoms.push_back({x, -nu, share * v.theta_minus()});
        sources.push_back({static_cast<int>(f), q, -1});
      }
    }
  }
  return {ParticleVarifold(std::move(atoms)), std::move(sources)};
}

inline ParticleVarifold sample_particles(const MeshVarifold& v, QuadratureRule rule = QuadratureRule::centroid) {
  return sample_particles_traced(v, rule).particles;
}

}  // namespace helfrich
