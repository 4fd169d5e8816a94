#include <gtest/gtest.h>

#include <helfrich/config.hpp>
#include <helfrich/flow_io.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace helfrich;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "helfrich_test_config";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
  auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string error_of(const nlohmann::json& doc) {
  try {
    parse_run_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, Defaults) {
  auto rc = parse_run_config(nlohmann::json::object());
  EXPECT_EQ(rc.mesh.shape, "icosphere");
  EXPECT_TRUE(rc.mesh.path.empty());
  EXPECT_FALSE(rc.rescale_to_m0);
  EXPECT_EQ(rc.flow.power, IncrementPower::squared);
  EXPECT_EQ(rc.flow.transport.solver, SolverKind::exact);
  EXPECT_TRUE(rc.flow.symmetry.empty());
  EXPECT_EQ(rc.output, fs::path("out"));
}

TEST(Config, TomlAndJsonAgree) {
  auto t = write("a.toml", R"(output = "res"
seed = 9
[mesh]
shape = "ellipsoid"
semi_axes = [1.0, 0.8, 0.6]
perturb = 0.05
[params]
beta = 2.0
gamma = -0.5
h0 = -1.0
m0 = 12.0
[flow]
tau = 0.01
steps = 7
power = "pth"
[flow.transport]
p = 1.5
[[flow.symmetry]]
kind = "reflection"
normal = [1.0, 0.0, 0.0]
)");
  auto j = write("a.json", R"({"output": "res", "seed": 9,
 "mesh": {"shape": "ellipsoid", "semi_axes": [1.0, 0.8, 0.6], "perturb": 0.05},
 "params": {"beta": 2.0, "gamma": -0.5, "h0": -1.0, "m0": 12.0},
 "flow": {"tau": 0.01, "steps": 7, "power": "pth", "transport": {"p": 1.5},
          "symmetry": [{"kind": "reflection", "normal": [1.0, 0.0, 0.0]}]}})");
  auto a = load_run_config(t);
  auto b = load_run_config(j);
  EXPECT_EQ(a.document, b.document);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.output, t.parent_path() / "res");
  EXPECT_EQ(a.seed, 9u);
  EXPECT_TRUE(a.rescale_to_m0);
  EXPECT_DOUBLE_EQ(a.params.m0, 12.0);
  EXPECT_EQ(a.flow.power, IncrementPower::pth);
  EXPECT_DOUBLE_EQ(a.flow.transport.p, 1.5);
  ASSERT_EQ(a.flow.symmetry.size(), 1u);

  auto m = build_initial_mesh(a);
  EXPECT_NEAR(mass(m), 12.0, 1e-12);
  auto m2 = build_initial_mesh(b);
  for (std::size_t i = 0; i < m.vertices().size(); ++i) EXPECT_EQ(m.vertices()[i], m2.vertices()[i]);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(error_of({{"flow", {{"tau", 0.0}}}}).find("flow.tau"), std::string::npos);
  EXPECT_NE(error_of({{"flow", {{"tau", -1.0}}}}).find("flow.tau"), std::string::npos);
  EXPECT_NE(error_of({{"flow", {{"transport", {{"p", 0.5}}}}}}).find("flow.transport.p"), std::string::npos);
  EXPECT_NE(error_of({{"params", {{"beta", 0.0}}}}).find("params.beta"), std::string::npos);
  EXPECT_NE(error_of({{"mesh", {{"shape", "cube"}}}}).find("mesh.shape"), std::string::npos);
  EXPECT_NE(error_of({{"flow", {{"steps", "ten"}}}}).find("flow.steps"), std::string::npos);
  EXPECT_NE(error_of({{"flow", {{"volume", 1.0}, {"volume_fraction", 0.9}}}}).find("volume_fraction"), std::string::npos);
  EXPECT_NE(error_of({{"flow", {{"symmetry", {{{"kind", "glide"}}}}}}}).find("flow.symmetry[0]"), std::string::npos);
}

TEST(Config, UnknownFieldsRejected) {
  EXPECT_NE(error_of({{"flow", {{"stpes", 3}}}}).find("flow.stpes"), std::string::npos);
  EXPECT_NE(error_of({{"colour", "red"}}).find("colour"), std::string::npos);
}

TEST(Config, FileErrors) {
  EXPECT_THROW(load_run_config(scratch("absent.toml")), ConfigError);
  EXPECT_THROW(load_run_config(write("broken.toml", "[flow\ntau = 1")), ConfigError);
  EXPECT_THROW(load_run_config(write("broken.json", "{\"flow\": ")), ConfigError);
}

TEST(FlowIo, TraceChecksFlagViolations) {
  FlowTrace t;
  t.tau = 0.5;
  t.tol_accept = 1e-10;
  t.m0 = 1.0;
  StepRecord r0;
  r0.energy = 10.0;
  StepRecord r1;
  r1.step = 1;
  r1.energy = 9.0;
  r1.increment = 0.5;  // costs 0.25 in the objective
  t.steps = {r0, r1};
  auto ok = io::check_trace(t, false);
  EXPECT_TRUE(ok.acceptance && ok.energy_monotone && ok.dissipation && ok.mass_conserved);

  t.steps[1].increment = 1.5;  // 9 + 2.25 > 10
  EXPECT_FALSE(io::check_trace(t, false).acceptance);
  t.steps[1].increment = 0.0;
  t.steps[1].energy = 10.5;
  EXPECT_FALSE(io::check_trace(t, false).energy_monotone);
  t.steps[1].energy = 9.0;
  t.steps[1].mass_residual = 1e-3;
  EXPECT_FALSE(io::check_trace(t, false).mass_conserved);
  t.steps[1].mass_residual = 0.0;
  t.steps[1].multiplicity = 2;
  EXPECT_FALSE(io::check_trace(t, false).multiplicity_constant);
}

TEST(FlowIo, TraceCsvShape) {
  FlowTrace t;
  StepRecord r;
  r.energy = 0.1;
  t.steps = {r, r};
  std::ostringstream out;
  io::write_trace_csv(out, t);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("step,energy", 0), 0u);
  const auto columns = std::count(header.begin(), header.end(), ',');
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NE(out.str().find("0.10000000000000001"), std::string::npos);  // round-trip precision
}

TEST(FlowIo, SvgIsWellFormed) {
  auto svg = io::svg_line_plot("energy", {0, 1, 2}, {{"G", {3.0, 2.0, 1.5}, "#1f77b4"}}, "G");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<path d=\"M"), std::string::npos);
  auto flat = io::svg_line_plot("flat", {0, 1}, {{"G", {1.0, 1.0}, "#000"}}, "G");
  EXPECT_EQ(flat.find("nan"), std::string::npos);
}
