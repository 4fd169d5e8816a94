// helfrich: flows, energies, sphere tables, transport distances and the
// acceptance suite from the command line.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or validation error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <helfrich/acceptance.hpp>
#include <helfrich/config.hpp>
#include <helfrich/flow_io.hpp>

using namespace helfrich;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kNumerical = 1, kUsage = 2;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericalError("SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Wall-clock per named phase, in the order they ran.
class PhaseTimer {
 public:
  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      PhaseTimer* self;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Record() { self->phases_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()); }
    } rec{this, name, t0};
    return f();
  }
  json to_json() const {
    json j = json::array();
    for (const auto& [n, s] : phases_) j.push_back({{"phase", n}, {"seconds", s}});
    return j;
  }

 private:
  std::vector<std::pair<std::string, double>> phases_;
};

HelfrichParams params_from(double beta, double gamma, double h0, std::optional<double> m0) {
  HelfrichParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.h0 = h0;
  if (m0) p.m0 = *m0;
  return p;
}

// ---------------------------------------------------------------------------
// flow

struct FlowArgs {
  std::string config;
  std::string output;
  bool quiet = false;
};

int cmd_flow(const FlowArgs& a) {
  PhaseTimer timer;
  RunConfig rc;
  MeshVarifold v0 = shapes::icosphere(0);
  try {
    rc = timer.run("config", [&] { return load_run_config(a.config); });
    if (!a.output.empty()) rc.output = a.output;
    v0 = timer.run("mesh", [&] { return build_initial_mesh(rc); });
    if (!rc.rescale_to_m0) rc.params.m0 = mass(v0);
    if (rc.volume_fraction) rc.flow.volume = *rc.volume_fraction * enclosed_volume(v0);
    rc.flow.validate();
    rc.params.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  json manifest;
  manifest["tool"] = "helfrich";
  manifest["version"] = kVersion;
  manifest["config"] = {{"path", rc.source.string()}, {"sha256", sha256_hex(rc.document.dump())}};
  {
    std::ostringstream off;
    io::write_off(off, v0);
    json mesh = {{"initial_mesh_sha256", sha256_hex(off.str())}};
    if (!rc.mesh.path.empty()) mesh["path"] = rc.mesh.path.string(), mesh["file_sha256"] = sha256_hex(read_bytes(rc.mesh.path));
    manifest["mesh"] = mesh;
  }
  manifest["seed"] = rc.seed;
  manifest["threads"] = thread_budget();

  std::filesystem::create_directories(rc.output);
  auto write_manifest = [&](const std::optional<std::string>& error) {
    manifest["phases"] = timer.to_json();
    manifest["error"] = error ? json(*error) : json();
    io::write_text(rc.output / "manifest.json", manifest.dump(2) + "\n");
  };

  int code = kOk;
  try {
    MeshVarifold start = v0;
    if (rc.relax_iterations > 0) {
      FlowConfig relax_cfg = rc.flow;
      relax_cfg.volume.reset();
      start = timer.run("relax", [&] { return relax_energy(v0, relax_cfg, rc.params, rc.relax_iterations); });
    }
    const StepObserver observer = [&](const StepRecord& r) {
      if (a.quiet) return;
      std::fprintf(stderr, "step %4d  energy %.10g  W %.3e  k %d  %s\n", r.step, r.energy, r.increment, r.multiplicity,
                   to_string(r.outcome));
    };
    const auto res = timer.run("flow", [&] { return run_flow(start, rc.flow, rc.params, observer); });
    timer.run("write", [&] {
      io::write_flow_outputs(rc.output, res, rc.params, !rc.flow.symmetry.empty());
      return 0;
    });
    if (res.error) {
      std::cerr << "error: flow stopped: " << *res.error << "\n";
      code = kNumerical;
    }
    write_manifest(res.error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_manifest(std::string(e.what()));
    return kNumerical;
  }
  if (!a.quiet) std::cerr << "outputs in " << rc.output.string() << "\n";
  return code;
}

// ---------------------------------------------------------------------------
// energy

struct EnergyArgs {
  std::string mesh;
  double beta = 1.0, gamma = 0.0, h0 = 0.0;
  int theta_plus = 1, theta_minus = 0;
  std::optional<int> genus;
};

int cmd_energy(const EnergyArgs& a) {
  MeshVarifold v = shapes::icosphere(0);
  HelfrichParams p;
  try {
    v = io::load_mesh(a.mesh, a.theta_plus, a.theta_minus, a.genus);
    p = params_from(a.beta, a.gamma, a.h0, mass(v));
    p.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  const auto field = compute_curvature(v);
  const auto e = helfrich_energy(v, field, p);
  json j;
  j["mesh"] = a.mesh;
  j["vertices"] = v.num_vertices();
  j["faces"] = v.num_faces();
  j["genus"] = v.genus();
  j["theta_plus"] = v.theta_plus();
  j["theta_minus"] = v.theta_minus();
  j["mass"] = mass(v);
  j["enclosed_volume"] = enclosed_volume(v);
  j["energy"] = {{"total", e.total}, {"bending", e.bending}, {"gauss", e.gauss}, {"cross", e.cross}, {"willmore", e.willmore}};
  j["lower_bound_certificate"] = lower_bound_certificate(v, field, p);
  try {
    j["multiplicity_bound"] = multiplicity_bound(e.total, p, v.genus());
  } catch (const DomainError& err) {
    j["multiplicity_bound"] = nullptr;
    j["multiplicity_bound_note"] = err.what();
  }
  try {
    const auto b = diameter_bounds(v, field);
    j["diameter_bounds"] = {{"lower", b.lower}, {"upper", b.upper}};
  } catch (const DomainError&) {
    j["diameter_bounds"] = nullptr;
  }
  j["diameter"] = diameter(v);
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// spheres

struct SpheresArgs {
  double beta = 1.0, gamma = 0.0, h0 = 0.0, m0 = 4 * kPi;
  int kmax = 10;
};

int cmd_spheres(const SpheresArgs& a) {
  SphereAnalytics s;
  try {
    const auto p = params_from(a.beta, a.gamma, a.h0, a.m0);
    if (a.kmax < 1) throw DomainError("--kmax must be >= 1");
    s = optimal_sphere(p, a.kmax);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (!s.warning.empty()) std::cerr << "warning: " << s.warning << "\n";
  std::printf("# k_star=%.17g branch=%s argmin=", s.k_star, to_string(s.branch));
  for (std::size_t i = 0; i < s.argmin.size(); ++i) std::printf("%s%d", i ? "," : "", s.argmin[i]);
  if (s.y_star) std::printf(" y_star=%.17g", *s.y_star);
  std::printf("\n");
  if (s.branch == SphereAnalytics::Branch::integer) std::printf("# exact interior minimizer\n");
  if (s.branch == SphereAnalytics::Branch::tie) std::printf("# tie between %d and %d\n", s.argmin[0], s.argmin[1]);
  std::printf("k,R_k,F_CH,argmin\n");
  for (const auto& [k, e] : s.energies) {
    if (k > std::max(a.kmax, s.argmin.back())) break;
    const bool best = std::find(s.argmin.begin(), s.argmin.end(), k) != s.argmin.end();
    std::printf("%d,%.17g,%.17g,%s\n", k, s.radius.at(k), e, best ? (s.argmin.size() > 1 ? "tie" : "*") : "");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// transport

struct TransportArgs {
  std::string source, target, plan;
  double p = 2.0;
  std::string solver = "exact";
  double epsilon = 1e-3;
  bool spatial = false;
};

int cmd_transport(const TransportArgs& a) {
  std::optional<ParticleVarifold> v, w;
  TransportConfig cfg;
  try {
    v = io::read_particles_csv(a.source);
    w = io::read_particles_csv(a.target);
    cfg.p = a.p;
    cfg.solver = a.solver == "entropic" ? SolverKind::entropic : SolverKind::exact;
    cfg.epsilon = a.epsilon;
    cfg.validate();
    const double mv = mass(*v), mw = mass(*w);
    if (std::abs(mv - mw) > 1e-9 * std::max(mv, mw)) {
      std::fprintf(stderr, "error: masses differ: %s has %.17g, %s has %.17g (relative gap %.3e)\n", a.source.c_str(), mv,
                   a.target.c_str(), mw, std::abs(mv - mw) / std::max(mv, mw));
      return kUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  try {
    const auto r = wasserstein(*v, *w, cfg);
    json j = {{"p", cfg.p}, {"solver", a.solver}, {"distance", r.distance}, {"cost", r.plan.cost}};
    if (a.spatial) j["spatial"] = wasserstein_spatial(*v, *w, cfg);
    std::cout << j.dump(2) << "\n";
    if (!a.plan.empty()) {
      std::ofstream out(a.plan);
      if (!out) throw DomainError("cannot write " + a.plan);
      write_plan_csv(out, r.plan);
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(acceptance::Options opts, bool verbose) {
  if (verbose) opts.progress = [](const std::string& s) { std::cerr << s << std::endl; };
  const auto results = acceptance::run(opts);
  acceptance::print_table(std::cout, results);
  const bool ok = acceptance::all_pass(results);
  std::cout << (ok ? "all criteria pass" : "some criteria fail") << "\n";
  return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canham-Helfrich minimizing movements on oriented varifolds"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  FlowArgs fa;
  auto* flow = app.add_subcommand("flow", "run a minimizing-movement flow from a TOML/JSON config");
  flow->add_option("config", fa.config, "run config (.toml or .json)")->required();
  flow->add_option("-o,--output", fa.output, "output directory (overrides the config)");
  flow->add_flag("-q,--quiet", fa.quiet, "no per-step progress");

  EnergyArgs ea;
  auto* energy = app.add_subcommand("energy", "energy breakdown and bounds of a mesh, as JSON");
  energy->add_option("mesh", ea.mesh, "mesh file (.off or .obj)")->required();
  energy->add_option("--beta", ea.beta, "bending rigidity")->capture_default_str();
  energy->add_option("--gamma", ea.gamma, "Gauss rigidity")->capture_default_str();
  energy->add_option("--h0", ea.h0, "spontaneous curvature")->capture_default_str();
  energy->add_option("--theta-plus,-k", ea.theta_plus, "multiplicity along the normal")->check(CLI::NonNegativeNumber);
  energy->add_option("--theta-minus", ea.theta_minus, "multiplicity against the normal")->check(CLI::NonNegativeNumber);
  energy->add_option("--genus", ea.genus, "genus (default: from the Euler characteristic)")->check(CLI::NonNegativeNumber);

  SpheresArgs sa;
  auto* spheres = app.add_subcommand("spheres", "energies of k-covered spheres and the optimal k, as CSV");
  spheres->add_option("--beta", sa.beta)->capture_default_str();
  spheres->add_option("--gamma", sa.gamma)->capture_default_str();
  spheres->add_option("--h0", sa.h0)->capture_default_str();
  spheres->add_option("--m0", sa.m0, "total mass")->capture_default_str();
  spheres->add_option("--kmax", sa.kmax, "rows to print")->capture_default_str();

  TransportArgs ta;
  auto* transport = app.add_subcommand("transport", "Wasserstein distance between two particle CSVs");
  transport->add_option("source", ta.source, "CSV with x,y,z,nx,ny,nz,w")->required();
  transport->add_option("target", ta.target, "CSV with x,y,z,nx,ny,nz,w")->required();
  transport->add_option("--p", ta.p, "order p >= 1")->capture_default_str();
  transport->add_option("--solver", ta.solver)->check(CLI::IsMember({"exact", "entropic"}))->capture_default_str();
  transport->add_option("--epsilon", ta.epsilon, "entropic regularization")->capture_default_str();
  transport->add_flag("--spatial", ta.spatial, "also report the spatial-marginal distance");
  transport->add_option("--plan", ta.plan, "write the optimal plan as CSV");

  acceptance::Options va;
  bool verbose = false;
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  validate->add_flag("--quick", va.quick, "static criteria 1-6 only");
  validate->add_option("--only", va.only, "criterion ids")->check(CLI::Range(1, 11));
  validate->add_flag("--flip-curvature-sign", va.curvature.flip_sign, "mutation hook: reverse the mean-curvature sign");
  validate->add_flag("-v,--verbose", verbose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*flow) return cmd_flow(fa);
    if (*energy) return cmd_energy(ea);
    if (*spheres) return cmd_spheres(sa);
    if (*transport) return cmd_transport(ta);
    if (*validate) return cmd_validate(va, verbose);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
