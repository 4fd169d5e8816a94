#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>
#include <toml.hpp>

#include "flow.hpp"
#include "mesh_io.hpp"
#include "shapes.hpp"

namespace helfrich {

/// Invalid run configuration; the message starts with the offending field path.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct MeshSource {
  std::filesystem::path path;  // empty: generate `shape`
  std::string shape = "icosphere";
  int subdivisions = 3;
  double radius = 1.0;
  Vec3 semi_axes{1.0, 1.0, 1.0};
  double major_radius = 2.0, minor_radius = 0.6;
  int n_major = 40, n_minor = 16;
  int theta_plus = 1, theta_minus = 0;
  std::optional<int> genus;
  double perturb = 0.0;  // radial perturbation amplitude, relative
  std::optional<Vec3> mirror;  // keep the perturbation symmetric about this plane normal
};

struct RunConfig {
  std::filesystem::path source;  // the config file itself
  nlohmann::json document;       // parsed input, used for hashing
  MeshSource mesh;
  HelfrichParams params;
  bool rescale_to_m0 = false;  // params.m0 was given: the mesh is scaled to it
  FlowConfig flow;
  std::optional<double> volume_fraction;  // v0 as a fraction of the initial volume
  int relax_iterations = 0;               // energy-only relaxation before the flow
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
};

namespace config_detail {

inline nlohmann::json to_json(const toml::node& n) {
  if (auto t = n.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (auto&& [k, v] : *t) j[std::string(k.str())] = to_json(v);
    return j;
  }
  if (auto a = n.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (auto&& v : *a) j.push_back(to_json(v));
    return j;
  }
  if (auto v = n.as_integer()) return v->get();
  if (auto v = n.as_floating_point()) return v->get();
  if (auto v = n.as_boolean()) return v->get();
  if (auto v = n.as_string()) return v->get();
  throw ConfigError(detail::concat("line ", n.source().begin.line, ": dates and times are not valid config values"));
}

/// Typed access to one JSON object with dotted-path error messages and a
/// check for unknown keys.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected a table");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : key.empty() ? path_ : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const std::string w = where(key);
    throw ConfigError((w.empty() ? std::string("<root>") : w) + ": " + msg);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const nlohmann::json empty = nlohmann::json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
  }

  template <typename T>
  T convert(const nlohmann::json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, Vec3>) {
      if (!v.is_array() || v.size() != 3) fail(key, "expected an array of 3 numbers");
      Vec3 out;
      for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) fail(key, "expected an array of 3 numbers");
        out[i] = v[i].get<double>();
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E>
E pick(Section& s, const std::string& key, E fallback, std::initializer_list<std::pair<const char*, E>> names) {
  std::optional<std::string> v;
  s.get(key, v);
  if (!v) return fallback;
  std::string options;
  for (auto& [n, e] : names) {
    if (*v == n) return e;
    options += options.empty() ? n : std::string(", ") + n;
  }
  s.fail(key, "unknown value '" + *v + "' (expected one of " + options + ")");
}

inline void require_positive(Section& s, const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) s.fail(key, detail::concat("must be > 0 (got ", v, ")"));
}

inline Isometry read_isometry(Section s) {
  std::string kind = "reflection";
  s.get("kind", kind);
  Isometry g;
  if (kind == "reflection") {
    Vec3 normal{1, 0, 0};
    double offset = 0.0;
    s.get("normal", normal);
    s.get("offset", offset);
    if (normal.norm() == 0.0) s.fail("normal", "must be nonzero");
    g = Isometry::reflection(normal, offset);
  } else if (kind == "rotation") {
    Vec3 axis{0, 0, 1}, center = Vec3::Zero();
    double angle = 0.0;
    s.get("axis", axis);
    s.get("angle", angle);
    s.get("center", center);
    if (axis.norm() == 0.0) s.fail("axis", "must be nonzero");
    g = Isometry::rotation(axis, angle, center);
  } else {
    s.fail("kind", "unknown value '" + kind + "' (expected reflection or rotation)");
  }
  s.finish();
  return g;
}

}  // namespace config_detail

/// Reads a run configuration from a parsed document. Relative paths are
/// resolved against `base`.
inline RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base = {}) {
  using config_detail::Section;
  RunConfig rc;
  rc.document = doc;
  Section root(doc, "");

  std::string output = "out";
  root.get("output", output);
  rc.output = base / output;
  std::int64_t seed = 0;
  root.get("seed", seed);
  if (seed < 0) root.fail("seed", "must be >= 0");
  rc.seed = static_cast<std::uint64_t>(seed);

  {
    auto s = root.sub("mesh");
    auto& m = rc.mesh;
    std::string path;
    s.get("path", path);
    if (!path.empty()) m.path = base / path;
    m.shape = config_detail::pick<std::string>(s, "shape", "icosphere",
                                               {{"icosphere", "icosphere"}, {"ellipsoid", "ellipsoid"}, {"torus", "torus"}});
    s.get("subdivisions", m.subdivisions);
    if (m.subdivisions < 0 || m.subdivisions > 7) s.fail("subdivisions", "must lie in [0, 7]");
    s.get("radius", m.radius);
    config_detail::require_positive(s, "radius", m.radius);
    s.get("semi_axes", m.semi_axes);
    if (m.semi_axes.minCoeff() <= 0.0) s.fail("semi_axes", "entries must be > 0");
    s.get("major_radius", m.major_radius);
    s.get("minor_radius", m.minor_radius);
    if (!(m.minor_radius > 0.0 && m.major_radius > m.minor_radius))
      s.fail("minor_radius", "need 0 < minor_radius < major_radius");
    s.get("n_major", m.n_major);
    s.get("n_minor", m.n_minor);
    if (m.n_major < 3 || m.n_minor < 3) s.fail("n_major", "torus resolution must be >= 3");
    s.get("theta_plus", m.theta_plus);
    s.get("theta_minus", m.theta_minus);
    if (m.theta_plus < 0 || m.theta_minus < 0 || m.theta_plus + m.theta_minus == 0)
      s.fail("theta_plus", "multiplicities must be >= 0 and not both zero");
    s.get("genus", m.genus);
    s.get("perturb", m.perturb);
    if (!(m.perturb >= 0.0 && m.perturb < 1.0)) s.fail("perturb", "must lie in [0, 1)");
    s.get("mirror", m.mirror);
    s.finish();
  }
  {
    auto s = root.sub("params");
    auto& p = rc.params;
    s.get("beta", p.beta);
    config_detail::require_positive(s, "beta", p.beta);
    s.get("gamma", p.gamma);
    s.get("h0", p.h0);
    if (s.has("m0")) {
      s.get("m0", p.m0);
      config_detail::require_positive(s, "m0", p.m0);
      rc.rescale_to_m0 = true;
    }
    s.finish();
  }
  {
    auto s = root.sub("flow");
    auto& f = rc.flow;
    s.get("tau", f.tau);
    config_detail::require_positive(s, "tau", f.tau);
    s.get("steps", f.steps);
    if (f.steps < 0) s.fail("steps", "must be >= 0");
    s.get("snapshot_stride", f.snapshot_stride);
    if (f.snapshot_stride < 1) s.fail("snapshot_stride", "must be >= 1");
    f.power = config_detail::pick(s, "power", IncrementPower::squared,
                                  {{"squared", IncrementPower::squared}, {"pth", IncrementPower::pth}});
    f.quadrature = config_detail::pick(s, "quadrature", QuadratureRule::centroid,
                                       {{"centroid", QuadratureRule::centroid}, {"three_point", QuadratureRule::three_point}});
    s.get("volume", f.volume);
    if (f.volume) config_detail::require_positive(s, "volume", *f.volume);
    s.get("volume_fraction", rc.volume_fraction);
    if (rc.volume_fraction) config_detail::require_positive(s, "volume_fraction", *rc.volume_fraction);
    if (f.volume && rc.volume_fraction) s.fail("volume_fraction", "give either volume or volume_fraction");
    s.get("volume_stages", f.volume_stages);
    if (f.volume_stages < 0) s.fail("volume_stages", "must be >= 0");
    s.get("multiplicity_search", f.multiplicity_search);
    s.get("multiplicity_max", f.multiplicity_max);
    if (f.multiplicity_max < 0) s.fail("multiplicity_max", "must be >= 0");
    if (f.multiplicity_search && (f.volume || rc.volume_fraction))
      s.fail("multiplicity_search", "cannot be combined with a volume constraint");
    s.get("relax_iterations", rc.relax_iterations);
    if (rc.relax_iterations < 0) s.fail("relax_iterations", "must be >= 0");
    {
      auto t = s.sub("transport");
      t.get("p", f.transport.p);
      if (!(f.transport.p >= 1.0)) t.fail("p", detail::concat("must be >= 1 (got ", f.transport.p, ")"));
      f.transport.solver = config_detail::pick(t, "solver", SolverKind::exact,
                                               {{"exact", SolverKind::exact}, {"entropic", SolverKind::entropic}});
      t.get("epsilon", f.transport.epsilon);
      config_detail::require_positive(t, "epsilon", f.transport.epsilon);
      t.get("max_iter", f.transport.max_iter);
      if (f.transport.max_iter <= 0) t.fail("max_iter", "must be > 0");
      t.get("tol", f.transport.tol);
      config_detail::require_positive(t, "tol", f.transport.tol);
      t.finish();
    }
    {
      auto o = s.sub("optimizer");
      auto& c = f.optimizer;
      o.get("max_inner_iter", c.max_inner_iter);
      if (c.max_inner_iter < 0) o.fail("max_inner_iter", "must be >= 0");
      o.get("candidate_inner_iter", c.candidate_inner_iter);
      if (c.candidate_inner_iter < 0) o.fail("candidate_inner_iter", "must be >= 0");
      o.get("grad_tol", c.grad_tol);
      if (!(c.grad_tol >= 0.0)) o.fail("grad_tol", "must be >= 0");
      c.step_rule = config_detail::pick(o, "step_rule", StepRule::armijo, {{"armijo", StepRule::armijo}, {"fixed", StepRule::fixed}});
      o.get("armijo", c.armijo);
      if (!(c.armijo > 0.0 && c.armijo < 1.0)) o.fail("armijo", "must lie in (0, 1)");
      o.get("max_backtracks", c.max_backtracks);
      if (c.max_backtracks < 0) o.fail("max_backtracks", "must be >= 0");
      o.get("fd_step", c.fd_step);
      config_detail::require_positive(o, "fd_step", c.fd_step);
      o.get("area_preserving", c.area_preserving);
      o.finish();
    }
    {
      auto w = s.sub("penalty");
      w.get("mass", f.penalty.mass);
      config_detail::require_positive(w, "mass", f.penalty.mass);
      w.get("volume", f.penalty.volume);
      config_detail::require_positive(w, "volume", f.penalty.volume);
      w.get("symmetry", f.penalty.symmetry);
      config_detail::require_positive(w, "symmetry", f.penalty.symmetry);
      w.finish();
    }
    if (s.has("symmetry")) {
      const auto& arr = s.raw("symmetry");
      if (!arr.is_array()) s.fail("symmetry", "expected an array of tables");
      for (std::size_t i = 0; i < arr.size(); ++i)
        f.symmetry.push_back(config_detail::read_isometry(Section(arr[i], s.where("symmetry") + "[" + std::to_string(i) + "]")));
    }
    s.finish();
  }
  root.finish();
  return rc;
}

/// Loads a TOML (.toml) or JSON (any other extension) run configuration.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  if (io::detail::lower_extension(path) == ".toml") {
    try {
      doc = config_detail::to_json(toml::parse(buf.str(), path.string()));
    } catch (const toml::parse_error& e) {
      throw ConfigError(detail::concat(path.string(), ":", e.source().begin.line, ": ", e.description()));
    }
  } else {
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  auto rc = parse_run_config(doc, path.parent_path());
  rc.source = path;
  return rc;
}

/// Builds the initial mesh described by the configuration: load or
/// generate, perturb, rescale to m0.
inline MeshVarifold build_initial_mesh(const RunConfig& rc) {
  const auto& m = rc.mesh;
  MeshVarifold v = [&] {
    if (!m.path.empty()) return io::load_mesh(m.path, m.theta_plus, m.theta_minus, m.genus);
    if (m.shape == "ellipsoid") return shapes::ellipsoid(m.subdivisions, m.semi_axes, m.theta_plus, m.theta_minus);
    if (m.shape == "torus")
      return shapes::torus(m.major_radius, m.minor_radius, m.n_major, m.n_minor, m.theta_plus, m.theta_minus);
    return shapes::icosphere(m.subdivisions, m.radius, m.theta_plus, m.theta_minus);
  }();
  if (m.perturb > 0.0)
    v = shapes::perturb_radially(v, m.perturb, shapes::RadialField(rc.seed, 6, 3.0, m.mirror.value_or(Vec3::Zero())),
                                 flow_detail::vertex_centroid(v.vertices()));
  if (rc.rescale_to_m0) v = shapes::scaled(v, std::sqrt(rc.params.m0 / mass(v)));
  return v;
}

}  // namespace helfrich
