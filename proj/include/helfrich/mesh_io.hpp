#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "varifold.hpp"

namespace helfrich::io {

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

namespace detail {

inline std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

inline std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open file: " + path.string());
  return in;
}

// Next non-empty, non-comment line.
inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

inline RawMesh read_off(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  if (!detail::next_data_line(in, line)) throw DomainError(name + ": empty OFF file");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic.rfind("OFF", 0) != 0) throw DomainError(name + ": missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(head >> nv)) {
    if (!detail::next_data_line(in, line)) throw DomainError(name + ": missing OFF counts");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  } else {
    head >> nf >> ne;
  }
  if (nv <= 0 || nf <= 0) throw DomainError(name + ": invalid OFF counts");
  RawMesh m;
  m.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!detail::next_data_line(in, line)) throw DomainError(name + ": truncated vertex list");
    std::istringstream s(line);
    Vec3 v;
    if (!(s >> v.x() >> v.y() >> v.z())) throw DomainError(name + ": bad vertex line " + std::to_string(i));
    m.vertices.push_back(v);
  }
  m.faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!detail::next_data_line(in, line)) throw DomainError(name + ": truncated face list");
    std::istringstream s(line);
    int count = 0;
    s >> count;
    if (count != 3)
      throw DomainError(name + ": face " + std::to_string(i) + " has " + std::to_string(count) +
                        " vertices; only triangles are supported");
    Face f;
    if (!(s >> f[0] >> f[1] >> f[2])) throw DomainError(name + ": bad face line " + std::to_string(i));
    m.faces.push_back(f);
  }
  return m;
}

inline RawMesh read_obj(std::istream& in, const std::string& name = "<stream>") {
  RawMesh m;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream s(line);
    std::string tag;
    if (!(s >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(s >> v.x() >> v.y() >> v.z())) throw DomainError(name + ": bad vertex at line " + std::to_string(lineno));
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (s >> tok) {
        const int raw = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(raw < 0 ? static_cast<int>(m.vertices.size()) + raw : raw - 1);
      }
      if (idx.size() != 3)
        throw DomainError(name + ": face at line " + std::to_string(lineno) + " has " + std::to_string(idx.size()) +
                          " vertices; only triangles are supported");
      m.faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  if (m.vertices.empty() || m.faces.empty()) throw DomainError(name + ": OBJ has no geometry");
  return m;
}

inline RawMesh read_mesh(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DomainError("mesh file not found: " + path.string());
  auto in = detail::open_or_throw(path);
  const std::string ext = detail::lower_extension(path);
  if (ext == ".off") return read_off(in, path.string());
  if (ext == ".obj") return read_obj(in, path.string());
  throw DomainError("unsupported mesh format: " + path.string() + " (expected .off or .obj)");
}

/// Loads a mesh; multiplicities and genus come from the caller. The genus
/// defaults to the value implied by the Euler characteristic.
inline MeshVarifold load_mesh(const std::filesystem::path& path, int theta_plus = 1, int theta_minus = 0,
                              std::optional<int> genus = std::nullopt) {
  RawMesh raw = read_mesh(path);
  int g = 0;
  if (genus) {
    g = *genus;
  } else {
    const auto topo = MeshTopology::build(static_cast<int>(raw.vertices.size()), raw.faces);
    const int chi = topo->euler_characteristic();
    if (chi > 2 || (2 - chi) % 2 != 0)
      throw DomainError(path.string() + ": Euler characteristic " + std::to_string(chi) + " is not that of a closed orientable surface");
    g = (2 - chi) / 2;
  }
  return MeshVarifold(std::move(raw.vertices), std::move(raw.faces), theta_plus, theta_minus, g);
}

inline void write_off(std::ostream& out, const MeshVarifold& v) {
  char buf[128];
  out << "OFF\n" << v.num_vertices() << ' ' << v.num_faces() << " 0\n";
  for (const Vec3& x : v.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", x.x(), x.y(), x.z());
    out << buf;
  }
  for (const Face& f : v.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_off(const std::filesystem::path& path, const MeshVarifold& v) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  write_off(out, v);
}

// Particle varifolds: CSV with header x,y,z,nx,ny,nz,w.

inline void write_particles_csv(std::ostream& out, const ParticleVarifold& p) {
  char buf[256];
  out << "x,y,z,nx,ny,nz,w\n";
  for (const Atom& a : p.atoms()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", a.x.x(), a.x.y(), a.x.z(),
                  a.nu.x(), a.nu.y(), a.nu.z(), a.w);
    out << buf;
  }
}

inline void write_particles_csv(const std::filesystem::path& path, const ParticleVarifold& p) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  write_particles_csv(out, p);
}

/// Reads x,y,z,nx,ny,nz,w rows. Normals within 1e-6 of unit length are
/// renormalized; larger deviations are rejected.
inline ParticleVarifold read_particles_csv(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  std::vector<Atom> atoms;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (lineno == 1 && line.find('x') != std::string::npos) continue;  // header
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream s(line);
    Atom a;
    if (!(s >> a.x.x() >> a.x.y() >> a.x.z() >> a.nu.x() >> a.nu.y() >> a.nu.z() >> a.w))
      throw DomainError(name + ": malformed row at line " + std::to_string(lineno));
    const double len = a.nu.norm();
    if (std::abs(len - 1.0) > 1e-6)
      throw DomainError(name + ": normal at line " + std::to_string(lineno) + " is not unit");
    a.nu /= len;
    atoms.push_back(a);
  }
  return ParticleVarifold(std::move(atoms));
}

inline ParticleVarifold read_particles_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DomainError("particle file not found: " + path.string());
  auto in = detail::open_or_throw(path);
  return read_particles_csv(in, path.string());
}

}  // namespace helfrich::io
