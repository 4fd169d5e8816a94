#pragma once

#include <functional>
#include <map>
#include <string>

#include "curvature.hpp"

namespace helfrich {

/// Canham-Helfrich energy split by term. `bending` holds the beta-term with
/// its H0^2 part, `gauss` the gamma-term and `cross` the -beta*H0 term;
/// `willmore` is reported alongside and is not part of `total`.
struct EnergyBreakdown {
  double total = 0.0;
  double bending = 0.0;
  double gauss = 0.0;
  double cross = 0.0;
  double willmore = 0.0;
};

inline void check_field_matches(const MeshVarifold& v, const CurvatureField& field) {
  if (field.size() != v.num_vertices())
    throw DomainError(detail::concat("curvature field has ", field.size(), " vertices, mesh has ", v.num_vertices()));
}

inline double willmore_energy(const MeshVarifold& v, const CurvatureField& field) {
  check_field_matches(v, field);
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += field.area[i] * field.mean_vector[i].squaredNorm();
  return 0.25 * s * v.multiplicity();
}

/// F = sum_v a_v [beta/2 (H_v^2 + H0^2) + gamma K_v] (theta+ + theta-)
///     - beta H0 (theta+ - theta-) sum_v a_v H_v
inline EnergyBreakdown helfrich_energy(const MeshVarifold& v, const CurvatureField& field, const HelfrichParams& p) {
  check_field_matches(v, field);
  double h2 = 0.0, area = 0.0, hsum = 0.0, defect = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    h2 += field.area[i] * field.mean_vector[i].squaredNorm();
    area += field.area[i];
    hsum += field.area[i] * field.mean[i];
    defect += field.defect[i];
  }
  const double mult = v.multiplicity();
  EnergyBreakdown e;
  e.bending = 0.5 * p.beta * (h2 + p.h0 * p.h0 * area) * mult;
  e.gauss = p.gamma * defect * mult;
  e.cross = -p.beta * p.h0 * v.orientation_density() * hsum;
  e.willmore = 0.25 * h2 * mult;
  e.total = e.bending + e.gauss + e.cross;
  return e;
}

/// Right-hand side of the Willmore-based lower bound
/// 2 beta (sqrt(W/m) - |H0|/2)^2 m + gamma * int K (theta+ + theta-),
/// with m = mass(V).
inline double lower_bound_certificate(const MeshVarifold& v, const CurvatureField& field, const HelfrichParams& p) {
  const double w = willmore_energy(v, field);
  const double m = mass(v);
  const double root = std::sqrt(w / m) - 0.5 * std::abs(p.h0);
  return 2.0 * p.beta * root * root * m + p.gamma * total_gauss_curvature(field) * v.multiplicity();
}

/// Integrand callback for generic curvature functionals: f(x, nu, H, K).
using CurvatureIntegrand = std::function<double(const Vec3&, const Vec3&, double, double)>;

inline double generic_energy(const MeshVarifold& v, const CurvatureField& field, const CurvatureIntegrand& f) {
  check_field_matches(v, field);
  const auto x = v.vertices();
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double value = f(x[i], field.normal[i], field.mean[i], field.gauss[i]);
    if (!std::isfinite(value)) throw DomainError(detail::concat("integrand is not finite at vertex ", i));
    s += field.area[i] * value;
  }
  return s * v.multiplicity();
}

// ---------------------------------------------------------------------------
// Multiply covered spheres

inline double sphere_radius(int k, double m0) {
  if (k <= 0) throw DomainError(detail::concat("multiplicity must be >= 1 (got ", k, ")"));
  return std::sqrt(m0 / (4.0 * kPi * k));
}

/// Energy of the k-covered round sphere of total mass m0 with outward normal.
inline double sphere_energy(int k, const HelfrichParams& p) {
  if (k <= 0) throw DomainError(detail::concat("multiplicity must be >= 1 (got ", k, ")"));
  p.validate();
  const double r1 = std::sqrt(p.m0 / (4.0 * kPi));
  const double kk = static_cast<double>(k);
  return 2.0 * p.beta * p.m0 *
         ((1.0 + p.gamma / (2.0 * p.beta)) / (r1 * r1) * kk + p.h0 / r1 * std::sqrt(kk) + 0.25 * p.h0 * p.h0);
}

/// Smallest multiplicity bound implied by the energy (Li-Yau type estimate).
/// With `genus` only the branch for that genus is used.
inline int multiplicity_bound(double energy, const HelfrichParams& p, std::optional<int> genus = std::nullopt) {
  p.validate();
  const double b = p.beta, g = p.gamma;
  if (!(g < 0.0)) throw DomainError(detail::concat("multiplicity bound requires gamma < 0 (got ", g, ")"));
  if (genus) {
    if (*genus < 0) throw DomainError("genus must be non-negative");
    if (!(-2.0 * b < g * (1 - *genus)))
      throw DomainError(detail::concat("multiplicity bound requires -2*beta < gamma*(1-g) (", -2.0 * b, " < ",
                                       g * (1 - *genus), " fails)"));
  } else if (!(-2.0 * b < g)) {
    throw DomainError(detail::concat("multiplicity bound requires -2*beta < gamma (", -2.0 * b, " < ", g, " fails)"));
  }
  const double h2m = p.h0 * p.h0 * p.m0;
  const double k0 = (2.0 * energy / (2.0 * b + g) + b * (2.0 * b - g) * h2m / ((2.0 * b + g) * (2.0 * b + g))) / (4.0 * kPi);
  const double k1 = (energy / b + 0.5 * h2m) / (4.0 * kPi);
  const double k2 = -energy / (4.0 * kPi * g);
  double value = 0.0;
  if (!genus) {
    value = std::max({k0, k1, k2});
  } else if (*genus == 0) {
    value = k0;
  } else if (*genus == 1) {
    value = k1;
  } else {
    value = k2;
  }
  if (!std::isfinite(value)) throw DomainError("multiplicity bound is not finite");
  return std::max(1, static_cast<int>(std::ceil(value)));
}

struct SphereAnalytics {
  enum class Branch { unit, integer, floor, ceil, tie, brute_force };

  double k_star = 0.0;
  std::optional<double> y_star;
  std::vector<int> argmin;  // one entry, or two on a tie
  Branch branch = Branch::unit;
  bool hypotheses_hold = true;
  std::string warning;
  std::map<int, double> energies;  // k -> energy of the k-covered sphere
  std::map<int, double> radius;    // k -> R_k

  int best() const { return argmin.front(); }
};

inline const char* to_string(SphereAnalytics::Branch b) {
  switch (b) {
    case SphereAnalytics::Branch::unit: return "unit";
    case SphereAnalytics::Branch::integer: return "exact interior minimizer";
    case SphereAnalytics::Branch::floor: return "floor";
    case SphereAnalytics::Branch::ceil: return "ceil";
    case SphereAnalytics::Branch::tie: return "tie";
    case SphereAnalytics::Branch::brute_force: return "brute force";
  }
  return "?";
}

/// Minimizing multiplicity among k-covered spheres of mass m0. Uses the
/// closed form when -2 beta < gamma <= 0 and 0 <= -H0 <= sqrt(16 pi/m0);
/// otherwise brute force over the range that contains the minimizer of the
/// convex relaxation.
inline SphereAnalytics optimal_sphere(const HelfrichParams& p, int table_size = 0) {
  p.validate();
  const double slope = 1.0 + p.gamma / (2.0 * p.beta);
  SphereAnalytics out;
  out.hypotheses_hold = (-2.0 * p.beta < p.gamma) && (p.gamma <= 0.0) && (p.h0 <= 0.0) &&
                        (-p.h0 <= std::sqrt(16.0 * kPi / p.m0));
  if (!(slope > 0.0))
    throw DomainError("gamma <= -2*beta: sphere energy is unbounded below in the multiplicity, no minimizer");
  out.k_star = p.m0 * p.h0 * p.h0 / (16.0 * kPi) / (slope * slope);

  if (out.hypotheses_hold) {
    const double ks = out.k_star;
    const double nearest = std::round(ks);
    if (ks <= 1.0) {
      out.branch = SphereAnalytics::Branch::unit;
      out.argmin = {1};
    } else if (std::abs(ks - nearest) <= 1e-12 * ks) {
      out.branch = SphereAnalytics::Branch::integer;
      out.argmin = {static_cast<int>(nearest)};
    } else {
      const int lo = static_cast<int>(std::floor(ks));
      const int hi = lo + 1;
      const double t1 = (std::sqrt(static_cast<double>(lo)) - std::sqrt(static_cast<double>(hi))) * p.h0;
      const double t2 = std::sqrt(4.0 * kPi / p.m0) * slope;
      const double y = t1 - t2;
      out.y_star = y;
      if (std::abs(y) < 1e-12 * (std::abs(t1) + std::abs(t2))) {
        out.branch = SphereAnalytics::Branch::tie;
        out.argmin = {lo, hi};
      } else if (y < 0.0) {
        out.branch = SphereAnalytics::Branch::floor;
        out.argmin = {lo};
      } else {
        out.branch = SphereAnalytics::Branch::ceil;
        out.argmin = {hi};
      }
    }
  } else {
    out.warning = "parameters outside -2*beta < gamma <= 0, 0 <= -H0 <= sqrt(16*pi/m0); using brute force";
    out.branch = SphereAnalytics::Branch::brute_force;
    // the relaxation r -> a r + b sqrt(r) is convex, so its integer minimizer
    // lies at floor/ceil of max(k_star, 1); H0 > 0 makes it increasing
    const int upper = p.h0 > 0.0 ? 2 : static_cast<int>(std::ceil(std::max(out.k_star, 1.0))) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= upper; ++k) {
      const double e = sphere_energy(k, p);
      if (e < best) {
        best = e;
        out.argmin = {k};
      }
    }
  }

  const int rows = std::max({table_size, out.argmin.back() + 2, 10});
  for (int k = 1; k <= rows; ++k) {
    out.energies[k] = sphere_energy(k, p);
    out.radius[k] = sphere_radius(k, p.m0);
  }
  return out;
}

}  // namespace helfrich
