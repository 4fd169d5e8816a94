#pragma once

#include <fstream>
#include <ostream>

#include "varifold.hpp"

namespace helfrich {

/// Per-vertex discrete curvature on a closed triangle mesh.
///
/// `mean_vector` is the cotangent Laplacian of the position divided by the
/// mixed Voronoi area; it points inward on a convex surface. `mean` carries
/// its magnitude with the sign of mean_vector . normal, so an outward
/// oriented sphere of radius R has mean = -2/R and mean^2 = |mean_vector|^2.
struct CurvatureField {
  std::vector<Vec3> mean_vector;
  std::vector<double> mean;
  std::vector<double> gauss;
  std::vector<double> area;    // mixed Voronoi area
  std::vector<double> defect;  // 2*pi - incident angles (= gauss * area)
  std::vector<Vec3> normal;    // area-weighted unit vertex normal

  std::size_t size() const { return mean.size(); }
};

struct CurvatureOptions {
  bool flip_sign = false;  // test hook: reverses the mean-curvature sign convention
};

/// Quantities at one vertex; everything is a sum over its incident faces.
struct VertexCurvature {
  Vec3 mean_vector = Vec3::Zero();
  double mean = 0.0;
  double gauss = 0.0;
  double area = 0.0;
  double defect = 0.0;
  Vec3 normal = Vec3::Zero();
};

namespace detail {

inline double cot_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex, w = q - apex;
  return u.dot(w) / u.cross(w).norm();
}

inline double angle_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex, w = q - apex;
  return std::atan2(u.cross(w).norm(), u.dot(w));
}

}  // namespace detail

/// Curvature at vertex `v` for the given positions (connectivity from `topo`).
inline VertexCurvature vertex_curvature(const MeshTopology& topo, std::span<const Vec3> x, int v,
                                        const CurvatureOptions& opts = {}) {
  VertexCurvature out;
  Vec3 lap = Vec3::Zero();
  double angle_sum = 0.0;
  Vec3 nsum = Vec3::Zero();
  for (int f : topo.vertex_faces[v]) {
    const Face& t = topo.faces[f];
    const int c = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
    const int j = t[(c + 1) % 3], k = t[(c + 2) % 3];
    const Vec3& xi = x[v];
    const Vec3& xj = x[j];
    const Vec3& xk = x[k];
    const Vec3 n = (xj - xi).cross(xk - xi);
    const double tri = 0.5 * n.norm();
    nsum += n;
    const double cot_j = detail::cot_at(xj, xk, xi);  // opposite edge (k, i)
    const double cot_k = detail::cot_at(xk, xi, xj);  // opposite edge (i, j)
    lap += cot_k * (xj - xi) + cot_j * (xk - xi);
    const double ai = detail::angle_at(xi, xj, xk);
    const double aj = detail::angle_at(xj, xk, xi);
    const double ak = detail::angle_at(xk, xi, xj);
    angle_sum += ai;
    // mixed Voronoi area, barycentric fallback on obtuse triangles
    const double right = kPi / 2.0;
    if (ai > right) {
      out.area += tri / 2.0;
    } else if (aj > right || ak > right) {
      out.area += tri / 4.0;
    } else {
      out.area += ((xj - xi).squaredNorm() * cot_k + (xk - xi).squaredNorm() * cot_j) / 8.0;
    }
  }
  if (!(out.area > 0.0))
    throw DomainError(detail::concat("vertex ", v, " has non-positive mixed area (degenerate star)"));
  out.mean_vector = lap / (2.0 * out.area);
  out.normal = nsum.normalized();
  double sign = out.mean_vector.dot(out.normal) < 0.0 ? -1.0 : 1.0;
  if (opts.flip_sign) sign = -sign;
  out.mean = sign * out.mean_vector.norm();
  out.defect = 2.0 * kPi - angle_sum;
  out.gauss = out.defect / out.area;
  return out;
}

inline CurvatureField compute_curvature(const MeshVarifold& mesh, const CurvatureOptions& opts = {}) {
  const auto& topo = mesh.topology();
  const auto x = mesh.vertices();
  const std::size_t n = mesh.num_vertices();
  CurvatureField field;
  field.mean_vector.resize(n);
  field.mean.resize(n);
  field.gauss.resize(n);
  field.area.resize(n);
  field.defect.resize(n);
  field.normal.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const VertexCurvature c = vertex_curvature(topo, x, static_cast<int>(v), opts);
    field.mean_vector[v] = c.mean_vector;
    field.mean[v] = c.mean;
    field.gauss[v] = c.gauss;
    field.area[v] = c.area;
    field.defect[v] = c.defect;
    field.normal[v] = c.normal;
  }
  return field;
}

struct MeanCurvature {
  std::vector<Vec3> vector;
  std::vector<double> scalar;
};

inline MeanCurvature mean_curvature(const MeshVarifold& mesh, const CurvatureOptions& opts = {}) {
  CurvatureField f = compute_curvature(mesh, opts);
  return {std::move(f.mean_vector), std::move(f.mean)};
}

inline std::vector<double> gauss_curvature(const MeshVarifold& mesh) { return compute_curvature(mesh).gauss; }

/// Sum of K * area; telescopes to 2*pi*chi.
inline double total_gauss_curvature(const CurvatureField& field) {
  double s = 0.0;
  for (double d : field.defect) s += d;
  return s;
}

struct SecondFormQuantities {
  std::vector<double> second_form_sq;  // |II|^2 = |Hbar|^2 - 2K
  std::vector<double> tensor_sq;       // |A|^2 = 2 |II|^2
};

inline double second_form_tolerance(double mean_vector_sq) { return 1e-8 * std::max(mean_vector_sq, 1.0); }

/// |II|^2 and |A|^2 per vertex, clamping small negative values to zero.
inline SecondFormQuantities second_form_quantities(const CurvatureField& field) {
  SecondFormQuantities out;
  out.second_form_sq.resize(field.size());
  out.tensor_sq.resize(field.size());
  for (std::size_t v = 0; v < field.size(); ++v) {
    const double h2 = field.mean_vector[v].squaredNorm();
    double ii = h2 - 2.0 * field.gauss[v];
    if (ii < 0.0) {
      if (ii < -second_form_tolerance(h2))
        throw DomainError(detail::concat("inconsistent discrete curvature at vertex ", v, ": |Hbar|^2 - 2K = ", ii));
      ii = 0.0;
    }
    out.second_form_sq[v] = ii;
    out.tensor_sq[v] = 2.0 * ii;
  }
  return out;
}

/// CSV with columns vertex,H,K,II2,area. |II|^2 is clamped at zero here
/// instead of raising.
inline void write_curvature_csv(std::ostream& out, const CurvatureField& field) {
  char buf[160];
  out << "vertex,H,K,II2,area\n";
  for (std::size_t v = 0; v < field.size(); ++v) {
    const double ii = std::max(0.0, field.mean_vector[v].squaredNorm() - 2.0 * field.gauss[v]);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", v, field.mean[v], field.gauss[v], ii,
                  field.area[v]);
    out << buf;
  }
}

}  // namespace helfrich
