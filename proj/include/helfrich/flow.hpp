#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "energy.hpp"
#include "parallel.hpp"
#include "transport.hpp"

namespace helfrich {

enum class StepRule { armijo, fixed };

/// How the transport term enters the incremental objective: W_p^2 (gradient
/// flow) or W_p^p (doubly nonlinear variant).
enum class IncrementPower { squared, pth };

struct OptimizerConfig {
  int max_inner_iter = 20;
  int candidate_inner_iter = 5;  // per multiplicity candidate before the winner is refined
  double grad_tol = 1e-9;        // relative, on the preconditioned gradient norm
  StepRule step_rule = StepRule::armijo;
  double armijo = 1e-4;
  int max_backtracks = 12;
  double fd_step = 1e-5;  // finite-difference step relative to the bounding-box diagonal
  // Try directions that keep every face area fixed to first order before the
  // plain gradient direction. Area changes move mass between atoms, which
  // makes the transport term grow linearly in the step.
  bool area_preserving = true;
};

struct PenaltyWeights {
  double mass = 1e3;
  double volume = 1e3;
  double symmetry = 1e3;
};

struct FlowConfig {
  double tau = 1e-3;
  int steps = 10;
  TransportConfig transport;
  QuadratureRule quadrature = QuadratureRule::centroid;
  std::optional<double> mass;    // target m0, defaults to the initial mass
  std::optional<double> volume;  // target v0
  std::vector<Isometry> symmetry;
  bool multiplicity_search = false;
  int multiplicity_max = 0;  // 0: use multiplicity_bound of the initial energy
  OptimizerConfig optimizer;
  PenaltyWeights penalty;
  IncrementPower power = IncrementPower::squared;
  int snapshot_stride = 1;
  int volume_stages = 0;  // continuation stages when the start violates the volume target, 0 = automatic

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError(detail::concat("tau must be > 0 (got ", tau, ")"));
    if (steps < 0) throw DomainError(detail::concat("steps must be >= 0 (got ", steps, ")"));
    transport.validate();
    if (mass && !(*mass > 0.0)) throw DomainError("mass target must be > 0");
    if (volume && !(*volume > 0.0)) throw DomainError("volume target must be > 0");
    for (const auto& g : symmetry) g.validate();
    if (multiplicity_max < 0) throw DomainError("multiplicity_max must be >= 0");
    if (multiplicity_search && volume)
      throw DomainError("volume constraint and multiplicity search cannot be combined (volume scales with multiplicity)");
    if (optimizer.max_inner_iter < 0 || optimizer.candidate_inner_iter < 0) throw DomainError("iteration budgets must be >= 0");
    if (!(optimizer.grad_tol >= 0.0)) throw DomainError("grad_tol must be >= 0");
    if (!(optimizer.armijo > 0.0 && optimizer.armijo < 1.0)) throw DomainError("armijo constant must lie in (0, 1)");
    if (optimizer.max_backtracks < 0) throw DomainError("max_backtracks must be >= 0");
    if (!(optimizer.fd_step > 0.0)) throw DomainError("fd_step must be > 0");
    if (!(penalty.mass > 0.0)) throw DomainError("penalty.mass must be > 0");
    if (volume && !(penalty.volume > 0.0)) throw DomainError("penalty.volume must be > 0 when the volume constraint is on");
    if (!symmetry.empty() && !(penalty.symmetry > 0.0))
      throw DomainError("penalty.symmetry must be > 0 when the symmetry constraint is on");
    if (snapshot_stride < 1) throw DomainError("snapshot_stride must be >= 1");
    if (volume_stages < 0) throw DomainError("volume_stages must be >= 0");
  }
};

struct DiameterBounds {
  double lower = 0.0;
  double upper = 0.0;
};

enum class StepOutcome { initial, optimized, backtracked, stalled };

inline const char* to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::initial: return "initial";
    case StepOutcome::optimized: return "optimized";
    case StepOutcome::backtracked: return "backtracked";
    case StepOutcome::stalled: return "stalled";
  }
  return "?";
}

struct StepRecord {
  int step = 0;
  double energy = 0.0;
  double objective = 0.0;  // G + transport term of the accepted step
  double increment = 0.0;  // W_p(V^n, V^{n-1}), exact solver
  double metric_derivative = 0.0;
  double diameter = 0.0;
  double willmore = 0.0;
  DiameterBounds diameter_bounds;  // from mass and Willmore energy of the accepted mesh
  int multiplicity = 1;
  double mass_residual = 0.0;
  double volume_residual = 0.0;
  double symmetry_defect = 0.0;
  int inner_iterations = 0;
  int transport_solves = 0;
  StepOutcome outcome = StepOutcome::initial;
  double multiplicity_gap = std::numeric_limits<double>::quiet_NaN();
  double tau_threshold = std::numeric_limits<double>::quiet_NaN();
};

struct FlowTrace {
  double tau = 0.0;
  double tol_accept = 0.0;
  double m0 = 0.0;
  std::optional<double> v0;
  IncrementPower power = IncrementPower::squared;
  double p = 2.0;
  std::vector<StepRecord> steps;
};

// ---------------------------------------------------------------------------
// Diameter

inline double diameter(std::span<const Vec3> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::max(best, (points[i] - points[j]).squaredNorm());
  return std::sqrt(best);
}

/// Diameter of the spatial support; for a mesh this is attained at vertices.
inline double diameter(const MeshVarifold& v) { return diameter(v.vertices()); }

inline double diameter(const ParticleVarifold& v) {
  std::vector<Vec3> x;
  x.reserve(v.size());
  for (const Atom& a : v.atoms()) x.push_back(a.x);
  return diameter(x);
}

/// sqrt(mass/W) <= diam <= (2/pi) sqrt(mass W) for closed varifolds.
inline DiameterBounds diameter_bounds(const MeshVarifold& v, const CurvatureField& field) {
  const double w = willmore_energy(v, field);
  if (!(w > 0.0)) throw DomainError("Willmore energy is zero; diameter bounds need W > 0");
  const double m = mass(v);
  return {std::sqrt(m / w), 2.0 / kPi * std::sqrt(m * w)};
}

// ---------------------------------------------------------------------------
// Metric derivative

struct MetricDerivative {
  std::vector<double> speed;         // W_p / tau per step
  std::vector<double> dissipation;   // cumulative sum of the transport terms
};

/// Per-step W_p/tau and the cumulative dissipation sum_m Phi(W_m)/(2 tau),
/// with Phi(W) = W^2 or W^p depending on the trace's increment power.
inline MetricDerivative estimate_metric_derivative(const FlowTrace& trace) {
  MetricDerivative out;
  double cumulative = 0.0;
  for (const auto& r : trace.steps) {
    if (r.step == 0) continue;
    out.speed.push_back(r.increment / trace.tau);
    const double phi = trace.power == IncrementPower::squared ? r.increment * r.increment : std::pow(r.increment, trace.p);
    cumulative += phi / (2.0 * trace.tau);
    out.dissipation.push_back(cumulative);
  }
  return out;
}

namespace flow_detail {

// ---------------------------------------------------------------------------
// Symmetry group acting on vertex indices

struct SymmetryGroup {
  std::vector<Isometry> elements;
  std::vector<std::vector<int>> perms;  // elements[e](x_v) = x_{perms[e][v]}

  bool trivial() const { return elements.size() <= 1; }

  static SymmetryGroup build(const MeshVarifold& v, const std::vector<Isometry>& generators) {
    SymmetryGroup g;
    const std::size_t n = v.num_vertices();
    std::vector<int> id(n);
    std::iota(id.begin(), id.end(), 0);
    g.elements.push_back(Isometry::identity());
    g.perms.push_back(id);
    if (generators.empty()) return g;

    const auto x = v.vertices();
    const double diam = diameter(v);
    std::vector<std::vector<int>> gen_perms;
    for (std::size_t k = 0; k < generators.size(); ++k) {
      const Isometry& iso = generators[k];
      iso.validate();
      std::vector<int> perm(n, -1);
      std::vector<char> hit(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 y = iso.apply_point(x[i]);
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          const double d = (x[j] - y).squaredNorm();
          if (d < bd) {
            bd = d;
            best = static_cast<int>(j);
          }
        }
        if (std::sqrt(bd) > 1e-8 * diam)
          throw DomainError(detail::concat("mesh is not symmetric under generator ", k, ": vertex ", i,
                                           " has no image (gap ", std::sqrt(bd), ")"));
        if (hit[best]) throw DomainError(detail::concat("generator ", k, " does not act as a vertex permutation"));
        hit[best] = 1;
        perm[i] = best;
      }
      // faces must map to faces
      std::set<std::array<int, 3>> faces;
      for (const Face& f : v.faces()) {
        std::array<int, 3> s = f;
        std::sort(s.begin(), s.end());
        faces.insert(s);
      }
      for (const Face& f : v.faces()) {
        std::array<int, 3> s = {perm[f[0]], perm[f[1]], perm[f[2]]};
        std::sort(s.begin(), s.end());
        if (!faces.count(s)) throw DomainError(detail::concat("mesh connectivity is not symmetric under generator ", k));
      }
      gen_perms.push_back(std::move(perm));
    }

    // closure
    for (std::size_t e = 0; e < g.elements.size(); ++e) {
      for (std::size_t k = 0; k < generators.size(); ++k) {
        Isometry h;
        h.linear = generators[k].linear * g.elements[e].linear;
        h.translation = generators[k].linear * g.elements[e].translation + generators[k].translation;
        std::vector<int> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = gen_perms[k][g.perms[e][i]];
        if (std::find(g.perms.begin(), g.perms.end(), perm) != g.perms.end()) continue;
        if (g.elements.size() >= 240) throw DomainError("symmetry group has more than 240 elements");
        g.elements.push_back(h);
        g.perms.push_back(std::move(perm));
      }
    }
    return g;
  }

  /// Orbit average of positions: x_v <- mean_h h^{-1}(x_{perm_h(v)}).
  void average_positions(std::vector<Vec3>& x) const {
    if (trivial()) return;
    std::vector<Vec3> out(x.size(), Vec3::Zero());
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const Mat3 lt = elements[e].linear.transpose();
      for (std::size_t v = 0; v < x.size(); ++v) out[v] += lt * (x[perms[e][v]] - elements[e].translation);
    }
    const double inv = 1.0 / static_cast<double>(elements.size());
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = out[v] * inv;
  }

  /// Same averaging for displacement fields (linear part only).
  void average_vectors(std::vector<Vec3>& d) const {
    if (trivial()) return;
    std::vector<Vec3> out(d.size(), Vec3::Zero());
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const Mat3 lt = elements[e].linear.transpose();
      for (std::size_t v = 0; v < d.size(); ++v) out[v] += lt * d[perms[e][v]];
    }
    const double inv = 1.0 / static_cast<double>(elements.size());
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = out[v] * inv;
  }
};

inline std::vector<Vec3> positions(const MeshVarifold& v) { return {v.vertices().begin(), v.vertices().end()}; }

inline double dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

inline void axpy(double s, const std::vector<Vec3>& d, std::vector<Vec3>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * d[i];
}

inline double bbox_diagonal(std::span<const Vec3> x) {
  Vec3 lo = x[0], hi = x[0];
  for (const Vec3& p : x) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

inline double mean_edge_length(const MeshVarifold& v) {
  const auto x = v.vertices();
  double s = 0.0;
  for (const Face& f : v.faces()) s += (x[f[0]] - x[f[1]]).norm() + (x[f[1]] - x[f[2]]).norm() + (x[f[2]] - x[f[0]]).norm();
  return s / (3.0 * static_cast<double>(v.num_faces()));
}

inline Vec3 vertex_centroid(std::span<const Vec3> x) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : x) c += p;
  return c / static_cast<double>(x.size());
}

/// Adds the vertex gradient of sum_f (gc_f . cross_f) where cross_f is the
/// unnormalized face normal.
inline void chain_cross(const MeshVarifold& v, const std::vector<Vec3>& gc, std::vector<Vec3>& out) {
  const auto x = v.vertices();
  for (std::size_t f = 0; f < v.num_faces(); ++f) {
    const Face& t = v.faces()[f];
    out[t[0]] += (x[t[1]] - x[t[2]]).cross(gc[f]);
    out[t[1]] += (x[t[2]] - x[t[0]]).cross(gc[f]);
    out[t[2]] += (x[t[0]] - x[t[1]]).cross(gc[f]);
  }
}

/// Gradient of mass(V) with respect to vertex positions.
inline std::vector<Vec3> mass_gradient(const MeshVarifold& v) {
  std::vector<Vec3> gc(v.num_faces());
  for (std::size_t f = 0; f < v.num_faces(); ++f) gc[f] = 0.5 * v.multiplicity() * v.face_normal(f);
  std::vector<Vec3> out(v.num_vertices(), Vec3::Zero());
  chain_cross(v, gc, out);
  return out;
}

/// Gradient of enclosed_volume(V) with respect to vertex positions.
inline std::vector<Vec3> volume_gradient(const MeshVarifold& v) {
  const auto x = v.vertices();
  const double rho = v.orientation_density() / 6.0;
  std::vector<Vec3> out(v.num_vertices(), Vec3::Zero());
  for (const Face& t : v.faces()) {
    out[t[0]] += rho * x[t[1]].cross(x[t[2]]);
    out[t[1]] += rho * x[t[2]].cross(x[t[0]]);
    out[t[2]] += rho * x[t[0]].cross(x[t[1]]);
  }
  return out;
}

/// Curvature part of the energy attached to one vertex. The Gauss term is
/// left out: its sum is topological and contributes nothing to gradients.
inline double vertex_bending_energy(const MeshTopology& topo, std::span<const Vec3> x, int v, const HelfrichParams& p,
                                    int mult, int rho) {
  const VertexCurvature c = vertex_curvature(topo, x, v);
  return 0.5 * p.beta * mult * c.area * (c.mean_vector.squaredNorm() + p.h0 * p.h0) - p.beta * p.h0 * rho * c.area * c.mean;
}

/// Central differences of the energy, touching only the one-ring of each vertex.
inline std::vector<Vec3> energy_gradient(const MeshVarifold& v, const HelfrichParams& p, double fd_step) {
  const auto& topo = v.topology();
  const std::size_t n = v.num_vertices();
  const double h = fd_step * bbox_diagonal(v.vertices());
  const int mult = v.multiplicity(), rho = v.orientation_density();
  std::vector<Vec3> grad(n, Vec3::Zero());
  const unsigned workers = std::max(1u, std::min<unsigned>(thread_budget(), static_cast<unsigned>(n / 64 + 1)));
  parallel_for(workers, [&](std::size_t w) {
    std::vector<Vec3> x = positions(v);
    const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    for (std::size_t u = lo; u < hi; ++u) {
      const auto& ring = topo.vertex_neighbors[u];
      auto local = [&] {
        double s = vertex_bending_energy(topo, x, static_cast<int>(u), p, mult, rho);
        for (int nb : ring) s += vertex_bending_energy(topo, x, nb, p, mult, rho);
        return s;
      };
      for (int c = 0; c < 3; ++c) {
        const double keep = x[u][c];
        x[u][c] = keep + h;
        const double up = local();
        x[u][c] = keep - h;
        const double down = local();
        x[u][c] = keep;
        grad[u][c] = (up - down) / (2.0 * h);
      }
    }
  }, 1);
  return grad;
}

/// Barycentric vertex areas times multiplicity; used as the preconditioner.
inline std::vector<double> lumped_areas(const MeshVarifold& v) {
  std::vector<double> a(v.num_vertices(), 0.0);
  for (std::size_t f = 0; f < v.num_faces(); ++f) {
    const double share = v.face_area(f) * v.multiplicity() / 3.0;
    for (int c : v.faces()[f]) a[c] += share;
  }
  return a;
}

struct Context {
  double m0 = 0.0;
  std::optional<double> v0;
  double tol_accept = 0.0;
  SymmetryGroup group;
};

/// One incremental problem: J(V) = G(V) + penalties + Phi(cost(V, prev)) / (2 tau).
class IncrementalProblem {
 public:
  struct Eval {
    double energy = 0.0;   // G_CH
    double penalty = 0.0;
    double cost = 0.0;     // transport cost (p-th power of W_p)
    double transport = 0.0;  // Phi(cost) / (2 tau)
    double objective = 0.0;
    TransportPlan plan;
    std::optional<SampledParticles> sample;
    double scale = 1.0;  // source weights are multiplied by this to match the previous mass
  };

  IncrementalProblem(const MeshVarifold& prev, const FlowConfig& cfg, const HelfrichParams& params, const Context& ctx,
                     bool with_transport = true)
      : prev_(prev), cfg_(cfg), params_(params), ctx_(ctx), with_transport_(with_transport),
        target_(sample_particles_traced(prev, cfg.quadrature)) {
    for (const Atom& a : target_.particles.atoms()) {
      target_w_.push_back(a.w);
      target_mass_ += a.w;
    }
  }

  int transport_solves() const { return solves_; }
  bool has_transport() const { return with_transport_; }
  const MeshVarifold& prev() const { return prev_; }

  double phi(double cost) const {
    const double c = std::max(cost, 0.0);
    return cfg_.power == IncrementPower::squared ? std::pow(c, 2.0 / cfg_.transport.p) : c;
  }
  double dphi(double cost) const {
    if (cfg_.power == IncrementPower::pth) return 1.0;
    const double e = 2.0 / cfg_.transport.p;
    if (e == 1.0) return 1.0;
    return e * std::pow(std::max(cost, 1e-300), e - 1.0);
  }

  Eval evaluate(const MeshVarifold& v, SolverKind solver) {
    Eval out;
    out.energy = helfrich_energy(v, compute_curvature(v), params_).total;
    out.penalty = penalty(v);
    if (with_transport_) {
      out.sample = sample_particles_traced(v, cfg_.quadrature);
      const auto& src = out.sample->particles;
      if (src.size() != target_.particles.size())
        throw DomainError("current and previous varifolds have different atom counts");
      double mass_v = 0.0;
      for (const Atom& a : src.atoms()) mass_v += a.w;
      out.scale = target_mass_ / mass_v;
      std::vector<double> a(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) a[i] = src[i].w * out.scale;
      const auto c = varifold_cost_matrix(src, target_.particles, cfg_.transport.p);
      if (solver == SolverKind::exact) {
        out.plan = ot::solve_exact(a, target_w_, c);
      } else {
        TransportConfig tc = cfg_.transport;
        tc.solver = SolverKind::entropic;
        out.plan = ot::solve(a, target_w_, c, tc);
      }
      ++solves_;
      out.cost = out.plan.cost;
      out.transport = phi(out.cost) / (2.0 * cfg_.tau);
    }
    out.objective = out.energy + out.penalty + out.transport;
    return out;
  }

  double penalty(const MeshVarifold& v) const {
    double s = 0.0;
    const double dm = mass(v) - ctx_.m0;
    s += cfg_.penalty.mass * dm * dm;
    if (ctx_.v0) {
      const double dv = enclosed_volume(v) - *ctx_.v0;
      s += cfg_.penalty.volume * dv * dv;
    }
    if (!ctx_.group.trivial()) {
      auto x = positions(v);
      auto avg = x;
      ctx_.group.average_positions(avg);
      for (std::size_t i = 0; i < x.size(); ++i) s += cfg_.penalty.symmetry * (x[i] - avg[i]).squaredNorm();
    }
    return s;
  }

  std::vector<Vec3> gradient(const MeshVarifold& v, const Eval& e) const {
    std::vector<Vec3> g = energy_gradient(v, params_, cfg_.optimizer.fd_step);
    const std::size_t n = v.num_vertices();

    // penalties
    const double dm = mass(v) - ctx_.m0;
    axpy(2.0 * cfg_.penalty.mass * dm, mass_gradient(v), g);
    if (ctx_.v0) axpy(2.0 * cfg_.penalty.volume * (enclosed_volume(v) - *ctx_.v0), volume_gradient(v), g);
    if (!ctx_.group.trivial()) {
      auto x = positions(v);
      auto avg = x;
      ctx_.group.average_positions(avg);
      for (std::size_t i = 0; i < n; ++i) g[i] += 2.0 * cfg_.penalty.symmetry * (x[i] - avg[i]);
    }

    if (!with_transport_ || e.plan.entries.empty()) return g;

    // transport term with the plan held fixed
    const double p = cfg_.transport.p;
    const double outer = dphi(e.cost) / (2.0 * cfg_.tau);
    const auto& src = e.sample->particles;
    const std::size_t m = src.size();
    std::vector<Vec3> gx(m, Vec3::Zero()), gn(m, Vec3::Zero());
    for (const auto& en : e.plan.entries) {
      const Atom& a = src[en.i];
      const Atom& b = target_.particles[en.j];
      const Vec3 dx = a.x - b.x, dn = a.nu - b.nu;
      const double lx = dx.norm(), ln = dn.norm(), d = lx + ln;
      if (!(d > 0.0)) continue;
      const double coef = en.mass * p * std::pow(d, p - 1.0);
      if (lx > 0.0) gx[en.i] += (coef / lx) * dx;
      if (ln > 0.0) gn[en.i] += (coef / ln) * dn;
    }
    // weight derivative through the dual potentials; the shift keeps the
    // renormalized total mass fixed
    double shift = 0.0;
    const bool duals = e.plan.row_potential.size() == m;
    std::vector<double> phi_row(m, 0.0);
    if (duals) {
      for (std::size_t i = 0; i < m; ++i) shift += e.plan.row_potential[i] * src[i].w * e.scale;
      shift /= target_mass_;
      for (std::size_t i = 0; i < m; ++i) phi_row[i] = e.scale * (e.plan.row_potential[i] - shift);
    }

    const int nodes = cfg_.quadrature == QuadratureRule::centroid ? 1 : 3;
    static const double kCentroid[1][3] = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    static const double kThree[3][3] = {
        {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
    const auto& bary = nodes == 1 ? kCentroid : kThree;

    const std::size_t nf = v.num_faces();
    std::vector<Vec3> face_gn(nf, Vec3::Zero());
    std::vector<double> face_ga(nf, 0.0);
    std::vector<Vec3> tg(n, Vec3::Zero());
    for (std::size_t i = 0; i < m; ++i) {
      const AtomSource& s = e.sample->sources[i];
      const Face& t = v.faces()[s.face];
      for (int c = 0; c < 3; ++c) tg[t[c]] += bary[s.node][c] * gx[i];
      face_gn[s.face] += static_cast<double>(s.sign) * gn[i];
      const int theta = s.sign > 0 ? v.theta_plus() : v.theta_minus();
      face_ga[s.face] += phi_row[i] * theta / nodes;
    }
    const auto x = v.vertices();
    std::vector<Vec3> gc(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& t = v.faces()[f];
      const Vec3 cr = face_cross(x[t[0]], x[t[1]], x[t[2]]);
      const double len = cr.norm();
      const Vec3 nu = cr / len;
      gc[f] = (face_gn[f] - nu * nu.dot(face_gn[f])) / len + 0.5 * face_ga[f] * nu;
    }
    chain_cross(v, gc, tg);
    axpy(outer, tg, g);
    return g;
  }

 private:
  MeshVarifold prev_;
  const FlowConfig& cfg_;
  const HelfrichParams& params_;
  const Context& ctx_;
  bool with_transport_;
  SampledParticles target_;
  std::vector<double> target_w_;
  double target_mass_ = 0.0;
  int solves_ = 0;
};

/// Removes from d the components along the constraint gradients in the
/// metric given by the preconditioner (so that c_k . d = 0 for each k).
inline void project_tangent(std::vector<Vec3>& d, const std::vector<std::vector<Vec3>>& constraints,
                            const std::vector<double>& inv_metric) {
  const std::size_t k = constraints.size();
  if (k == 0) return;
  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    rhs[a] = dot(constraints[a], d);
    for (std::size_t b = 0; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += constraints[a][i].dot(constraints[b][i]) * inv_metric[i];
      gram(a, b) = s;
    }
  }
  const Eigen::VectorXd lambda = gram.completeOrthogonalDecomposition().solve(rhs);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= lambda[a] * inv_metric[i] * constraints[a][i];
}

/// P-orthogonal projector onto directions that keep each face area fixed to
/// first order, P = diag(inv_metric).
class AreaKernelProjector {
 public:
  AreaKernelProjector(const MeshVarifold& v, const std::vector<double>& inv_metric) : inv_(inv_metric) {
    const auto x = v.vertices();
    const int nf = static_cast<int>(v.num_faces()), nv = static_cast<int>(v.num_vertices());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nf) * 9);
    for (int f = 0; f < nf; ++f) {
      const Face& t = v.faces()[f];
      const Vec3 nu = v.face_normal(f);
      const Vec3 g[3] = {0.5 * (x[t[1]] - x[t[2]]).cross(nu), 0.5 * (x[t[2]] - x[t[0]]).cross(nu),
                         0.5 * (x[t[0]] - x[t[1]]).cross(nu)};
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 3; ++k) trip.emplace_back(f, 3 * t[c] + k, g[c][k]);
    }
    jac_.resize(nf, 3 * nv);
    jac_.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd pd(3 * nv);
    for (int i = 0; i < nv; ++i) pd.segment<3>(3 * i).setConstant(inv_[i]);
    const Eigen::SparseMatrix<double> normal = jac_ * pd.asDiagonal() * jac_.transpose();
    solver_.compute(normal);
    ok_ = solver_.info() == Eigen::Success;
    pd_ = std::move(pd);
  }

  bool ok() const { return ok_; }

  /// y is a direction (already scaled by P); returns its projection.
  std::vector<Vec3> apply(const std::vector<Vec3>& y) const {
    const Eigen::VectorXd yv = flat(y);
    const Eigen::VectorXd lambda = solver_.solve(jac_ * yv);
    const Eigen::VectorXd out = yv - pd_.cwiseProduct(jac_.transpose() * lambda);
    return unflat(out);
  }

 private:
  static Eigen::VectorXd flat(const std::vector<Vec3>& y) {
    Eigen::VectorXd v(3 * y.size());
    for (std::size_t i = 0; i < y.size(); ++i) v.segment<3>(3 * i) = y[i];
    return v;
  }
  static std::vector<Vec3> unflat(const Eigen::VectorXd& v) {
    std::vector<Vec3> y(v.size() / 3);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = v.segment<3>(3 * i);
    return y;
  }

  std::vector<double> inv_;
  Eigen::SparseMatrix<double> jac_;
  Eigen::VectorXd pd_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  bool ok_ = false;
};

/// Descent direction restricted to the face-area kernel (and the volume
/// tangent space when v0 is set). Empty when the projection is unusable.
inline std::vector<Vec3> area_preserving_direction(const MeshVarifold& v, const std::vector<Vec3>& g,
                                                   const std::vector<double>& inv, const Context& ctx) {
  AreaKernelProjector q(v, inv);
  if (!q.ok()) return {};
  std::vector<Vec3> y(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) y[i] = -inv[i] * g[i];
  auto d = q.apply(y);
  if (ctx.v0) {
    const auto cv = volume_gradient(v);
    std::vector<Vec3> pc(cv.size());
    for (std::size_t i = 0; i < cv.size(); ++i) pc[i] = inv[i] * cv[i];
    const auto qc = q.apply(pc);
    const double denom = dot(cv, qc);
    if (!(std::abs(denom) > 0.0)) return {};
    axpy(-dot(cv, d) / denom, qc, d);
  }
  for (const Vec3& di : d)
    if (!di.allFinite()) return {};
  return d;
}

struct OptimizeResult {
  MeshVarifold mesh;
  IncrementalProblem::Eval eval;
  int iterations = 0;
};

/// Preconditioned descent with backtracking on the inner objective.
inline OptimizeResult optimize(IncrementalProblem& prob, const MeshVarifold& start, const FlowConfig& cfg,
                               const Context& ctx, int budget, SolverKind solver) {
  OptimizeResult r{start, prob.evaluate(start, solver), 0};
  const double h_mesh = mean_edge_length(start);
  double s_last = 0.0;
  for (int it = 0; it < budget; ++it) {
    const MeshVarifold& v = r.mesh;
    const auto g = prob.gradient(v, r.eval);
    const auto areas = lumped_areas(v);
    std::vector<double> inv(areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) inv[i] = 1.0 / areas[i];

    std::vector<std::vector<Vec3>> directions;
    if (cfg.optimizer.area_preserving && prob.has_transport()) directions.push_back(area_preserving_direction(v, g, inv, ctx));
    {
      std::vector<Vec3> d(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) d[i] = -inv[i] * g[i];
      std::vector<std::vector<Vec3>> cons{mass_gradient(v)};
      if (ctx.v0) cons.push_back(volume_gradient(v));
      project_tangent(d, cons, inv);
      directions.push_back(std::move(d));
    }

    bool accepted = false, converged = false;
    for (auto& d : directions) {
      if (d.empty()) continue;
      ctx.group.average_vectors(d);
      const double slope = dot(g, d);
      if (!(slope < 0.0)) continue;
      double dnorm = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) dnorm += d[i].squaredNorm() * areas[i];
      if (std::sqrt(dnorm) <= cfg.optimizer.grad_tol * (1.0 + std::abs(r.eval.objective))) {
        converged = true;
        break;
      }
      double dmax = 0.0;
      for (const Vec3& di : d) dmax = std::max(dmax, di.norm());
      const double s_cap = 0.1 * h_mesh / dmax;
      double s = s_last > 0.0 ? std::min(2.0 * s_last / dmax, s_cap) : 0.02 * h_mesh / dmax;
      for (int bt = 0; bt <= cfg.optimizer.max_backtracks; ++bt, s *= 0.25) {
        std::vector<Vec3> x = positions(v);
        axpy(s, d, x);
        ctx.group.average_positions(x);
        try {
          MeshVarifold trial = v.with_vertices(std::move(x));
          auto e = prob.evaluate(trial, solver);
          const double bar = cfg.optimizer.step_rule == StepRule::armijo ? cfg.optimizer.armijo * s * slope : 0.0;
          if (e.objective <= r.eval.objective + bar && e.objective < r.eval.objective) {
            const double gain = r.eval.objective - e.objective;
            r.mesh = std::move(trial);
            r.eval = std::move(e);
            s_last = s * dmax;  // remembered as a displacement length
            accepted = true;
            ++r.iterations;
            if (gain <= 1e-14 * (1.0 + std::abs(r.eval.objective))) converged = true;
            break;
          }
        } catch (const DomainError&) {
        } catch (const NumericalError&) {
        }
        if (cfg.optimizer.step_rule == StepRule::fixed) break;
      }
      if (accepted) break;
    }
    if (!accepted || converged) break;
  }
  return r;
}

/// Exact projection onto {mass = m0, volume = v0}: Newton steps along the
/// mass-orthogonal volume gradient, each followed by a uniform rescale about
/// the vertex centroid. `max_move` caps the displacement per Newton step.
inline MeshVarifold project_constraints(const MeshVarifold& v, const Context& ctx, double max_move = 0.0) {
  std::vector<Vec3> x = positions(v);
  ctx.group.average_positions(x);
  MeshVarifold cur = v.with_vertices(x);
  const double cap = max_move > 0.0 ? max_move : 0.5 * mean_edge_length(v);
  for (int it = 0; it < 100; ++it) {
    if (ctx.v0) {
      const auto gv = volume_gradient(cur);
      const auto gm = mass_gradient(cur);
      const double mu = dot(gv, gm) / dot(gm, gm);
      std::vector<Vec3> u = gv;
      axpy(-mu, gm, u);
      ctx.group.average_vectors(u);
      const double slope = dot(gv, u);
      const double gap = *ctx.v0 - enclosed_volume(cur);
      if (std::abs(gap) > 1e-13 * *ctx.v0) {
        if (!(slope > 1e-14 * dot(gv, gv)))
          throw NumericalError("volume constraint cannot be enforced: the shape is critical for volume at fixed area");
        double t = gap / slope;
        double umax = 0.0;
        for (const Vec3& ui : u) umax = std::max(umax, ui.norm());
        if (std::abs(t) * umax > cap) t = std::copysign(cap / umax, t);
        x = positions(cur);
        axpy(t, u, x);
        cur = cur.with_vertices(x);
      }
    }
    x = positions(cur);
    const Vec3 c = vertex_centroid(x);
    const double s = std::sqrt(ctx.m0 / mass(cur));
    for (Vec3& p : x) p = c + s * (p - c);
    ctx.group.average_positions(x);
    cur = cur.with_vertices(x);
    const bool mass_ok = std::abs(mass(cur) - ctx.m0) <= 1e-13 * ctx.m0;
    const bool vol_ok = !ctx.v0 || std::abs(enclosed_volume(cur) - *ctx.v0) <= 1e-12 * *ctx.v0;
    if (mass_ok && vol_ok) return cur;
  }
  if (ctx.v0 && std::abs(enclosed_volume(cur) - *ctx.v0) > 1e-4 * *ctx.v0)
    throw NumericalError(detail::concat("volume projection did not converge (residual ",
                                        std::abs(enclosed_volume(cur) - *ctx.v0), ")"));
  return cur;
}

inline double max_symmetry_defect(const MeshVarifold& v, const FlowConfig& cfg) {
  if (cfg.symmetry.empty()) return 0.0;
  const auto p = sample_particles(v, cfg.quadrature);
  double worst = 0.0;
  for (const auto& g : cfg.symmetry) worst = std::max(worst, symmetry_defect(p, g, cfg.transport.p));
  return worst;
}

struct StepResult {
  MeshVarifold mesh;
  StepRecord record;
};

/// Takes the optimizer's candidate to the constraint set and checks the
/// acceptance inequality with the exact solver, backtracking toward prev.
inline StepResult finalize(IncrementalProblem& prob, const MeshVarifold& candidate, const FlowConfig& cfg,
                           const Context& ctx, double prev_energy, int inner_iterations) {
  const MeshVarifold& prev = prob.prev();
  const auto prev_x = positions(prev);
  const auto cand_x = positions(candidate);
  const bool same_mult = candidate.theta_plus() == prev.theta_plus() && candidate.theta_minus() == prev.theta_minus();
  for (int level = 0; level <= 10; ++level) {
    const double t = std::ldexp(1.0, -level);
    std::optional<MeshVarifold> trial;
    try {
      if (level == 0) {
        trial = project_constraints(candidate, ctx);
      } else {
        if (!same_mult) break;  // the segment toward prev changes multiplicity: no interpolation
        std::vector<Vec3> x(prev_x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = prev_x[i] + t * (cand_x[i] - prev_x[i]);
        trial = project_constraints(prev.with_vertices(x), ctx);
      }
    } catch (const DomainError&) {
      continue;
    } catch (const NumericalError&) {
      continue;
    }
    const auto e = prob.evaluate(*trial, SolverKind::exact);
    if (e.energy + e.transport <= prev_energy + ctx.tol_accept) {
      StepResult out{*trial, {}};
      out.record.energy = e.energy;
      out.record.objective = e.energy + e.transport;
      out.record.increment = ot::root_p(e.cost, cfg.transport.p);
      out.record.inner_iterations = inner_iterations;
      out.record.outcome = level == 0 ? StepOutcome::optimized : StepOutcome::backtracked;
      return out;
    }
  }
  StepResult out{prev, {}};
  out.record.energy = prev_energy;
  out.record.objective = prev_energy;
  out.record.increment = 0.0;
  out.record.inner_iterations = inner_iterations;
  out.record.outcome = StepOutcome::stalled;
  return out;
}

inline void fill_diagnostics(StepRecord& r, const MeshVarifold& v, const FlowConfig& cfg, const Context& ctx) {
  r.metric_derivative = r.increment / cfg.tau;
  r.diameter = diameter(v);
  const auto field = compute_curvature(v);
  r.willmore = willmore_energy(v, field);
  if (r.willmore > 0.0) r.diameter_bounds = diameter_bounds(v, field);
  r.multiplicity = v.multiplicity();
  r.mass_residual = std::abs(mass(v) - ctx.m0);
  r.volume_residual = ctx.v0 ? std::abs(enclosed_volume(v) - *ctx.v0) : 0.0;
  r.symmetry_defect = max_symmetry_defect(v, cfg);
}

inline double energy_of(const MeshVarifold& v, const HelfrichParams& p) {
  return helfrich_energy(v, compute_curvature(v), p).total;
}

inline Context make_context(const MeshVarifold& v, const FlowConfig& cfg, const HelfrichParams& params) {
  Context ctx;
  ctx.m0 = cfg.mass.value_or(mass(v));
  ctx.v0 = cfg.volume;
  if (ctx.v0 && v.orientation_density() == 0)
    throw DomainError("volume constraint needs theta_plus != theta_minus (enclosed volume vanishes)");
  ctx.tol_accept = 1e-10 * (1.0 + std::abs(energy_of(v, params)));
  ctx.group = SymmetryGroup::build(v, cfg.symmetry);
  return ctx;
}

inline StepResult step_with_context(const MeshVarifold& prev, const FlowConfig& cfg, const HelfrichParams& params,
                                    const Context& ctx, double prev_energy) {
  IncrementalProblem prob(prev, cfg, params, ctx);
  auto opt = optimize(prob, prev, cfg, ctx, cfg.optimizer.max_inner_iter, cfg.transport.solver);
  auto out = finalize(prob, opt.mesh, cfg, ctx, prev_energy, opt.iterations);
  out.record.transport_solves = prob.transport_solves();
  return out;
}

/// Rescales about the vertex centroid so that mass = m0 with multiplicity j.
inline MeshVarifold rescale_to_multiplicity(const MeshVarifold& v, int j, double m0) {
  const MeshVarifold w = v.with_multiplicity(j, 0);
  auto x = positions(w);
  const Vec3 c = vertex_centroid(x);
  const double s = std::sqrt(m0 / mass(w));
  for (Vec3& p : x) p = c + s * (p - c);
  return w.with_vertices(std::move(x));
}

}  // namespace flow_detail

/// One minimizing-movement step from prev. The context (mass target,
/// acceptance tolerance, symmetry group) is derived from prev.
inline std::pair<MeshVarifold, StepRecord> incremental_step(const MeshVarifold& prev, const FlowConfig& cfg,
                                                            const HelfrichParams& params) {
  cfg.validate();
  params.validate();
  const auto ctx = flow_detail::make_context(prev, cfg, params);
  const double g0 = flow_detail::energy_of(prev, params);
  auto r = flow_detail::step_with_context(prev, cfg, params, ctx, g0);
  r.record.step = 1;
  flow_detail::fill_diagnostics(r.record, r.mesh, cfg, ctx);
  return {std::move(r.mesh), r.record};
}

struct MultiplicityChoice {
  MeshVarifold mesh;
  StepRecord record;
  int chosen = 1;
};

namespace flow_detail {

inline MultiplicityChoice multiplicity_step_ctx(const MeshVarifold& prev, const FlowConfig& cfg,
                                                const HelfrichParams& params, const Context& ctx, double prev_energy,
                                                int kmax) {
  if (prev.theta_minus() != 0) throw DomainError("multiplicity search needs theta_minus = 0");
  const int k = prev.theta_plus();
  if (std::max(kmax, k) == 1) {
    auto s = step_with_context(prev, cfg, params, ctx, prev_energy);
    return {std::move(s.mesh), s.record, 1};
  }
  IncrementalProblem prob(prev, cfg, params, ctx);
  struct Candidate {
    int j;
    MeshVarifold mesh;
    double objective;
  };
  std::vector<Candidate> cands;
  double threshold = std::numeric_limits<double>::infinity();
  int iterations = 0;
  for (int j = 1; j <= std::max(kmax, k); ++j) {
    MeshVarifold start = j == k ? prev : rescale_to_multiplicity(prev, j, ctx.m0);
    if (j != k) {
      const auto e = prob.evaluate(start, SolverKind::exact);
      const double gain = prev_energy - e.energy;
      if (gain > 0.0) threshold = std::min(threshold, prob.phi(e.cost) / (2.0 * gain));
    }
    auto opt = optimize(prob, start, cfg, ctx, cfg.optimizer.candidate_inner_iter, cfg.transport.solver);
    iterations += opt.iterations;
    cands.push_back({j, std::move(opt.mesh), opt.eval.objective});
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return (a.j == k) > (b.j == k);
  });
  const double gap = cands.size() > 1 ? cands[1].objective - cands[0].objective : std::numeric_limits<double>::infinity();
  auto refined = optimize(prob, cands[0].mesh, cfg, ctx, cfg.optimizer.max_inner_iter, cfg.transport.solver);
  iterations += refined.iterations;
  auto out = finalize(prob, refined.mesh, cfg, ctx, prev_energy, iterations);
  out.record.transport_solves = prob.transport_solves();
  out.record.multiplicity_gap = gap;
  out.record.tau_threshold = threshold;
  const int chosen = out.mesh.theta_plus();
  return {std::move(out.mesh), out.record, chosen};
}

}  // namespace flow_detail

/// Multiplicity-aware step over candidates {1..kmax}. Each candidate is the
/// previous mesh rescaled to the target mass with multiplicity j, then
/// vertex-optimized; the best incremental objective wins. The record also
/// carries the objective gap to the runner-up and the smallest tau at which a
/// rescaled candidate would beat staying put.
inline MultiplicityChoice multiplicity_step(const MeshVarifold& prev, const FlowConfig& cfg,
                                            const HelfrichParams& params, int kmax) {
  cfg.validate();
  params.validate();
  const auto ctx = flow_detail::make_context(prev, cfg, params);
  auto r = flow_detail::multiplicity_step_ctx(prev, cfg, params, ctx, flow_detail::energy_of(prev, params), kmax);
  r.record.step = 1;
  flow_detail::fill_diagnostics(r.record, r.mesh, cfg, ctx);
  return r;
}

/// Energy minimizer for the mesh at fixed connectivity under the mass (and
/// volume, symmetry) constraints, without the transport term. Used to build
/// discrete minimizers as flow starting points.
inline MeshVarifold relax_energy(const MeshVarifold& v, const FlowConfig& cfg, const HelfrichParams& params,
                                 int iterations) {
  const auto ctx = flow_detail::make_context(v, cfg, params);
  auto cur = flow_detail::project_constraints(v, ctx);
  for (int round = 0; round < iterations; round += 50) {
    flow_detail::IncrementalProblem prob(cur, cfg, params, ctx, false);
    auto opt = flow_detail::optimize(prob, cur, cfg, ctx, std::min(50, iterations - round), cfg.transport.solver);
    cur = flow_detail::project_constraints(opt.mesh, ctx);
    if (opt.iterations == 0) break;
  }
  return cur;
}

struct FlowResult {
  FlowTrace trace;
  std::vector<std::pair<int, MeshVarifold>> snapshots;  // (step, mesh)
  std::optional<MeshVarifold> final_mesh;
  std::optional<std::string> error;
  int prepass_steps = 0;
  double seconds = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Iterates the minimizing-movement scheme. A start that violates the
/// volume target is first moved onto it by continuation (not recorded in the
/// trace). Errors stop the run; the trace up to the failure is returned.
inline FlowResult run_flow(const MeshVarifold& v0, const FlowConfig& cfg, const HelfrichParams& params,
                           const StepObserver& observer = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  params.validate();
  FlowResult out;
  out.trace.tau = cfg.tau;
  out.trace.power = cfg.power;
  out.trace.p = cfg.transport.p;
  try {
    const double m0 = cfg.mass.value_or(mass(v0));
    if (std::abs(mass(v0) - m0) > 1e-6 * m0)
      throw DomainError(detail::concat("initial mass ", mass(v0), " differs from the target ", m0));
    FlowConfig base = cfg;
    base.mass = m0;
    base.volume.reset();
    auto ctx = flow_detail::make_context(v0, base, params);
    MeshVarifold cur = flow_detail::project_constraints(v0, ctx);

    if (cfg.volume) {
      const double start = enclosed_volume(cur), target = *cfg.volume;
      const double gap = std::abs(target - start) / target;
      const int stages = cfg.volume_stages > 0 ? cfg.volume_stages : (gap > 1e-6 ? std::max(1, static_cast<int>(std::ceil(gap / 0.01))) : 0);
      for (int s = 1; s <= stages; ++s) {
        FlowConfig stage = base;
        stage.volume = start + (target - start) * s / stages;
        auto sctx = flow_detail::make_context(cur, stage, params);
        sctx.m0 = m0;
        cur = flow_detail::project_constraints(cur, sctx, 0.05 * flow_detail::mean_edge_length(cur));
        auto r = flow_detail::step_with_context(cur, stage, params, sctx, flow_detail::energy_of(cur, params));
        cur = r.mesh;
        ++out.prepass_steps;
      }
      ctx.v0 = target;
      cur = flow_detail::project_constraints(cur, ctx);
    }

    double g = flow_detail::energy_of(cur, params);
    ctx.tol_accept = 1e-10 * (1.0 + std::abs(g));
    out.trace.tol_accept = ctx.tol_accept;
    out.trace.m0 = ctx.m0;
    out.trace.v0 = ctx.v0;

    FlowConfig run = cfg;
    run.mass = ctx.m0;
    int kmax = cfg.multiplicity_max;
    if (cfg.multiplicity_search && kmax == 0) {
      HelfrichParams q = params;
      q.m0 = ctx.m0;
      kmax = multiplicity_bound(g, q);
    }

    StepRecord r0;
    r0.step = 0;
    r0.energy = g;
    r0.objective = g;
    flow_detail::fill_diagnostics(r0, cur, run, ctx);
    out.trace.steps.push_back(r0);
    out.snapshots.emplace_back(0, cur);
    if (observer) observer(r0);

    for (int n = 1; n <= cfg.steps; ++n) {
      StepRecord rec;
      if (cfg.multiplicity_search) {
        auto c = flow_detail::multiplicity_step_ctx(cur, run, params, ctx, g, kmax);
        cur = std::move(c.mesh);
        rec = c.record;
      } else {
        auto s = flow_detail::step_with_context(cur, run, params, ctx, g);
        cur = std::move(s.mesh);
        rec = s.record;
      }
      rec.step = n;
      flow_detail::fill_diagnostics(rec, cur, run, ctx);
      g = rec.energy;
      out.trace.steps.push_back(rec);
      if (n % cfg.snapshot_stride == 0 || n == cfg.steps) out.snapshots.emplace_back(n, cur);
      if (observer) observer(rec);
    }
    out.final_mesh = cur;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace helfrich
