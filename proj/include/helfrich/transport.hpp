#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <tuple>

#include "network_simplex.hpp"
#include "parallel.hpp"
#include "varifold.hpp"

namespace helfrich {

/// Ground metric on R^3 x S^2: d = |x - x'| + |nu - nu'|, raised to p.
inline double ground_distance(const Atom& a, const Atom& b) { return (a.x - b.x).norm() + (a.nu - b.nu).norm(); }

inline double ground_cost(const Atom& a, const Atom& b, double p) {
  const double d = ground_distance(a, b);
  return p == 1.0 ? d : (p == 2.0 ? d * d : std::pow(d, p));
}

enum class SolverKind { exact, entropic };

struct TransportConfig {
  double p = 2.0;
  SolverKind solver = SolverKind::exact;
  double epsilon = 1e-3;  // entropic regularization, relative to the mean ground cost
  int max_iter = 20000;
  double tol = 1e-9;  // entropic: relative L1 residual of the row marginals

  void validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError(detail::concat("transport order p must be >= 1 (got ", p, ")"));
    if (solver == SolverKind::entropic && !(epsilon > 0.0))
      throw DomainError("entropic regularization epsilon must be > 0");
    if (max_iter <= 0) throw DomainError("max_iter must be positive");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
  }
};

struct PlanEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

/// Coupling between a source with `rows` atoms and a target with `cols`.
/// `cost` is the transport cost (the p-th power of the distance).
struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<PlanEntry> entries;
  double cost = 0.0;
  std::vector<double> row_potential;  // dual variables; exact solver only
  std::vector<double> col_potential;

  std::vector<double> row_sums() const {
    std::vector<double> s(rows, 0.0);
    for (const auto& e : entries) s[e.i] += e.mass;
    return s;
  }
  std::vector<double> col_sums() const {
    std::vector<double> s(cols, 0.0);
    for (const auto& e : entries) s[e.j] += e.mass;
    return s;
  }
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

inline void write_plan_csv(std::ostream& out, const TransportPlan& plan) {
  char buf[96];
  out << "i,j,mass\n";
  for (const auto& e : plan.entries) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", e.i, e.j, e.mass);
    out << buf;
  }
}

namespace ot {

/// Dense row-major cost matrix.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  double mean() const {
    double s = 0.0;
    for (double c : data) s += c;
    return s / static_cast<double>(data.size());
  }
};

template <typename CostFn>
CostMatrix build_cost(int rows, int cols, CostFn&& fn) {
  CostMatrix c;
  c.rows = rows;
  c.cols = cols;
  c.data.resize(static_cast<std::size_t>(rows) * cols);
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t i) {
    double* row = c.data.data() + i * cols;
    for (int j = 0; j < cols; ++j) row[j] = fn(static_cast<int>(i), j);
  }, 16);
  return c;
}

inline TransportPlan plan_from_arcs(const CostMatrix& c, std::span<const Arc> arcs, const NetworkSimplexResult& r) {
  TransportPlan plan;
  plan.rows = c.rows;
  plan.cols = c.cols;
  for (std::size_t e = 0; e < arcs.size(); ++e) {
    if (r.flow[e] > 0.0) {
      plan.entries.push_back({arcs[e].source, arcs[e].target, r.flow[e]});
      plan.cost += r.flow[e] * arcs[e].cost;
    }
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  plan.cost = 0.0;
  for (const auto& e : plan.entries) plan.cost += e.mass * c(e.i, e.j);
  plan.row_potential = r.row_potential;
  plan.col_potential = r.col_potential;
  return plan;
}

/// Exact optimal plan. Small problems use every cell as an arc; larger ones
/// start from the cheapest cells per row/column and add cells with negative
/// reduced cost until the duals are feasible on the full matrix, which
/// certifies optimality for the dense problem.
inline TransportPlan solve_exact(std::span<const double> a, std::span<const double> b, const CostMatrix& c,
                                 std::size_t dense_limit = 250000, int candidates = 8) {
  const int m = c.rows, n = c.cols;
  const std::size_t cells = static_cast<std::size_t>(m) * n;
  double scale = 1.0;
  for (double v : c.data) scale = std::max(scale, std::abs(v));
  double total = 0.0;
  for (double w : a) total += w;

  if (cells <= dense_limit) {
    std::vector<Arc> arcs;
    arcs.reserve(cells);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) arcs.push_back({i, j, c(i, j)});
    NetworkSimplex ns(a, b, arcs);
    const auto r = ns.run();
    if (r.artificial_flow > 1e-9 * total) throw NumericalError("exact transport solver left artificial flow");
    return plan_from_arcs(c, arcs, r);
  }

  std::vector<std::uint8_t> in_set(cells, 0);
  std::vector<Arc> arcs;
  auto add = [&](int i, int j) {
    const std::size_t k = static_cast<std::size_t>(i) * n + j;
    if (!in_set[k]) {
      in_set[k] = 1;
      arcs.push_back({i, j, c(i, j)});
    }
  };
  const int kk = std::min({candidates, m, n});
  std::vector<int> idx;
  for (int i = 0; i < m; ++i) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::nth_element(idx.begin(), idx.begin() + (kk - 1), idx.end(), [&](int x, int y) { return c(i, x) < c(i, y); });
    for (int t = 0; t < kk; ++t) add(i, idx[t]);
  }
  for (int j = 0; j < n; ++j) {
    idx.resize(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::nth_element(idx.begin(), idx.begin() + (kk - 1), idx.end(), [&](int x, int y) { return c(x, j) < c(y, j); });
    for (int t = 0; t < kk; ++t) add(idx[t], j);
  }

  for (int round = 0; round < 200; ++round) {
    NetworkSimplex ns(a, b, arcs);
    const auto r = ns.run();
    // price every cell against the current duals
    std::vector<std::pair<double, int>> worst;
    std::size_t added = 0;
    const double tol = 1e-12 * scale;
    for (int i = 0; i < m; ++i) {
      worst.clear();
      for (int j = 0; j < n; ++j) {
        const double rc = c(i, j) - r.row_potential[i] - r.col_potential[j];
        if (rc < -tol && !in_set[static_cast<std::size_t>(i) * n + j]) worst.emplace_back(rc, j);
      }
      if (worst.empty()) continue;
      const std::size_t take = std::min<std::size_t>(worst.size(), static_cast<std::size_t>(kk));
      std::partial_sort(worst.begin(), worst.begin() + take, worst.end());
      for (std::size_t t = 0; t < take; ++t) add(i, worst[t].second);
      added += take;
    }
    if (added == 0) {
      if (r.artificial_flow > 1e-9 * total) throw NumericalError("exact transport solver left artificial flow");
      return plan_from_arcs(c, arcs, r);
    }
  }
  throw NumericalError("exact transport: column generation did not converge");
}

/// Log-domain Sinkhorn with epsilon scaling. `epsilon` is absolute here.
inline TransportPlan solve_entropic(std::span<const double> a, std::span<const double> b, const CostMatrix& c,
                                    double epsilon, int max_iter, double tol) {
  const int m = c.rows, n = c.cols;
  std::vector<double> f(m, 0.0), g(n, 0.0), loga(m), logb(n);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    loga[i] = std::log(a[i]);
    total += a[i];
  }
  for (int j = 0; j < n; ++j) logb[j] = std::log(b[j]);
  double cmax = 0.0;
  for (double v : c.data) cmax = std::max(cmax, v);

  auto update_f = [&](double eps) {
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) mx = std::max(mx, (g[j] - c(i, j)) / eps);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp((g[j] - c(i, j)) / eps - mx);
      f[i] = eps * loga[i] - eps * (mx + std::log(s));
    }, 16);
  };
  auto update_g = [&](double eps) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
      const int j = static_cast<int>(jj);
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) mx = std::max(mx, (f[i] - c(i, j)) / eps);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += std::exp((f[i] - c(i, j)) / eps - mx);
      g[j] = eps * logb[j] - eps * (mx + std::log(s));
    }, 16);
  };
  auto row_residual = [&](double eps) {
    double res = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp((f[i] + g[j] - c(i, j)) / eps);
      res += std::abs(s - a[i]);
    }
    return res / total;
  };

  // epsilon scaling: geometric schedule from the cost range down to the target
  double eps = std::max(epsilon, cmax);
  int iter = 0;
  while (eps > epsilon) {
    for (int k = 0; k < 10 && iter < max_iter; ++k, ++iter) {
      update_f(eps);
      update_g(eps);
    }
    eps = std::max(epsilon, eps * 0.5);
  }
  double residual = std::numeric_limits<double>::infinity();
  while (iter < max_iter) {
    update_f(epsilon);
    update_g(epsilon);
    ++iter;
    if (iter % 10 == 0 || iter == max_iter) {
      residual = row_residual(epsilon);
      if (residual < tol) break;
    }
  }
  if (!(residual < tol))
    throw NumericalError(detail::concat("Sinkhorn did not converge in ", max_iter, " iterations (residual ", residual, ")"));

  TransportPlan plan;
  plan.rows = m;
  plan.cols = n;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = std::exp((f[i] + g[j] - c(i, j)) / epsilon);
      if (p > 0.0) {
        plan.entries.push_back({i, j, p});
        plan.cost += p * c(i, j);
      }
    }
  plan.row_potential = f;
  plan.col_potential = g;
  return plan;
}

inline TransportPlan solve(std::span<const double> a, std::span<const double> b, const CostMatrix& c,
                           const TransportConfig& cfg) {
  if (cfg.solver == SolverKind::exact) return solve_exact(a, b, c);
  return solve_entropic(a, b, c, cfg.epsilon * std::max(c.mean(), 1e-300), cfg.max_iter, cfg.tol);
}

/// Weights of `w` rescaled to the mass of `v` after the equal-mass check.
inline void balanced_weights(const ParticleVarifold& v, const ParticleVarifold& w, std::vector<double>& a,
                             std::vector<double>& b) {
  const double mv = mass(v), mw = mass(w);
  if (std::abs(mv - mw) > 1e-9 * mv)
    throw DomainError(detail::concat("unequal masses: ", mv, " vs ", mw, " (relative difference ",
                                     std::abs(mv - mw) / mv, ")"));
  a.resize(v.size());
  b.resize(w.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = v[i].w;
  for (std::size_t j = 0; j < w.size(); ++j) b[j] = w[j].w * (mv / mw);
}

inline double root_p(double cost, double p) { return p == 1.0 ? cost : std::pow(std::max(cost, 0.0), 1.0 / p); }

}  // namespace ot

inline ot::CostMatrix varifold_cost_matrix(const ParticleVarifold& v, const ParticleVarifold& w, double p) {
  return ot::build_cost(static_cast<int>(v.size()), static_cast<int>(w.size()),
                        [&](int i, int j) { return ground_cost(v[i], w[j], p); });
}

/// p-Wasserstein distance on R^3 x S^2 and its optimal plan.
inline TransportResult wasserstein(const ParticleVarifold& v, const ParticleVarifold& w, const TransportConfig& cfg) {
  cfg.validate();
  std::vector<double> a, b;
  ot::balanced_weights(v, w, a, b);
  TransportResult out;
  out.plan = ot::solve(a, b, varifold_cost_matrix(v, w, cfg.p), cfg);
  out.distance = ot::root_p(out.plan.cost, cfg.p);
  return out;
}

/// Spatial marginal: atoms collapsed onto positions (coincident positions
/// merged on a 1e-12 grid), normals dropped.
struct SpatialMeasure {
  std::vector<Vec3> x;
  std::vector<double> w;
};

inline SpatialMeasure spatial_marginal(const ParticleVarifold& v) {
  SpatialMeasure out;
  std::map<std::tuple<long long, long long, long long>, std::size_t> index;
  auto q = [](double c) { return static_cast<long long>(std::llround(c / 1e-12)); };
  for (const Atom& a : v.atoms()) {
    const auto key = std::make_tuple(q(a.x.x()), q(a.x.y()), q(a.x.z()));
    auto [it, fresh] = index.emplace(key, out.x.size());
    if (fresh) {
      out.x.push_back(a.x);
      out.w.push_back(a.w);
    } else {
      out.w[it->second] += a.w;
    }
  }
  return out;
}

inline double wasserstein_spatial(const ParticleVarifold& v, const ParticleVarifold& w, const TransportConfig& cfg) {
  cfg.validate();
  std::vector<double> a0, b0;
  ot::balanced_weights(v, w, a0, b0);
  const SpatialMeasure sv = spatial_marginal(v), sw = spatial_marginal(w);
  std::vector<double> a = sv.w, b = sw.w;
  const double ratio = mass(v) / mass(w);
  for (double& x : b) x *= ratio;
  const auto c = ot::build_cost(static_cast<int>(a.size()), static_cast<int>(b.size()), [&](int i, int j) {
    const double d = (sv.x[i] - sw.x[j]).norm();
    return cfg.p == 1.0 ? d : std::pow(d, cfg.p);
  });
  return ot::root_p(ot::solve(a, b, c, cfg).cost, cfg.p);
}

/// Test function on R^3 x S^2 for the W1 dual certificate.
using TestFunction = std::function<double(const Vec3& x, const Vec3& nu)>;

/// integral f dV - integral f dW, a lower bound for W1(V, W) when f is
/// 1-Lipschitz for the ground metric. The Lipschitz bound is checked on every
/// pair of atoms of V and W.
inline double dual_certificate_w1(const ParticleVarifold& v, const ParticleVarifold& w, const TestFunction& f) {
  std::vector<double> a, b;
  ot::balanced_weights(v, w, a, b);
  std::vector<Atom> all(v.atoms().begin(), v.atoms().end());
  all.insert(all.end(), w.atoms().begin(), w.atoms().end());
  std::vector<double> fv(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) fv[i] = f(all[i].x, all[i].nu);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double d = ground_distance(all[i], all[j]);
      if (std::abs(fv[i] - fv[j]) > d * (1.0 + 1e-12) + 1e-14)
        throw DomainError(detail::concat("test function is not 1-Lipschitz on atoms ", i, " and ", j, ": |df|=",
                                         std::abs(fv[i] - fv[j]), " > d=", d));
    }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += a[i] * fv[i];
  for (std::size_t j = 0; j < w.size(); ++j) s -= b[j] * fv[v.size() + j];
  return s;
}

/// W_p between the isometric image of V and V itself.
inline double symmetry_defect(const ParticleVarifold& v, const Isometry& g, double p = 2.0) {
  TransportConfig cfg;
  cfg.p = p;
  return wasserstein(pushforward(v, g), v, cfg).distance;
}

}  // namespace helfrich
