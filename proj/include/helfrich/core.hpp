#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace helfrich {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr const char* kVersion = "0.1.0";

/// Invalid input: bad parameters, malformed meshes, unequal masses, ...
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its target (solver divergence,
/// line-search exhaustion, collapse of mesh elements during a flow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}
}  // namespace detail

/// Material constants of the membrane and the prescribed mass/volume.
struct HelfrichParams {
  double beta = 1.0;   // bending rigidity
  double gamma = 0.0;  // Gauss rigidity
  double h0 = 0.0;     // spontaneous curvature
  double m0 = 4.0 * kPi;
  std::optional<double> v0;

  /// True when the integrand is convex in the curvature tensor,
  /// i.e. -6/5 beta < gamma < 0.
  bool convexity_flag() const { return gamma < 0.0 && gamma > -1.2 * beta; }

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError(detail::concat("beta must be > 0 (got ", beta, ")"));
    if (!std::isfinite(gamma) || !std::isfinite(h0))
      throw DomainError("gamma and h0 must be finite");
    if (!(m0 > 0.0) || !std::isfinite(m0))
      throw DomainError(detail::concat("m0 must be > 0 (got ", m0, ")"));
    if (v0) {
      if (!std::isfinite(*v0)) throw DomainError("v0 must be finite");
      // isoperimetric compatibility: 36 pi v0^2 <= m0^3
      if (36.0 * kPi * (*v0) * (*v0) > m0 * m0 * m0 * (1.0 + 1e-12))
        throw DomainError(detail::concat("v0 violates the isoperimetric bound 36*pi*v0^2 <= m0^3 (v0=", *v0,
                                         ", m0=", m0, ")"));
    }
  }
};

}  // namespace helfrich
