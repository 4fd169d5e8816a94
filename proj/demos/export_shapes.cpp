// Writes the sample meshes and particle files used by the demo configs.
//
//   export_shapes <dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <helfrich/mesh_io.hpp>
#include <helfrich/shapes.hpp>

using namespace helfrich;

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  io::write_off(dir / "sphere.off", shapes::icosphere(3));
  io::write_off(dir / "ellipsoid.off", shapes::ellipsoid(3, {1.0, 0.8, 1.3}));
  io::write_off(dir / "torus.off", shapes::torus(2.0, 0.6, 40, 16));

  // a sphere with one face missing
  const auto soup = shapes::icosphere_soup(1);
  {
    std::ofstream out(dir / "open_cap.off");
    out << "OFF\n" << soup.vertices.size() << ' ' << soup.faces.size() - 1 << " 0\n";
    for (const auto& x : soup.vertices) out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
    for (std::size_t f = 1; f < soup.faces.size(); ++f)
      out << "3 " << soup.faces[f][0] << ' ' << soup.faces[f][1] << ' ' << soup.faces[f][2] << '\n';
  }

  // two particle varifolds of equal mass and one heavier
  const auto a = shapes::icosphere(1);
  auto b = shapes::perturb_radially(a, 0.2, shapes::RadialField(5));
  b = shapes::scaled(b, std::sqrt(mass(a) / mass(b)));
  io::write_particles_csv(dir / "particles_a.csv", sample_particles(a));
  io::write_particles_csv(dir / "particles_b.csv", sample_particles(b));
  io::write_particles_csv(dir / "particles_heavy.csv", sample_particles(shapes::scaled(a, 1.5)));
  std::cout << "wrote sample data to " << dir.string() << "\n";
}
