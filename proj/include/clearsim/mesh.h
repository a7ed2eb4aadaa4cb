//
// Indexed triangle meshes with per-vertex normals, the Wavefront OBJ subset
// used by the asset catalog (v / vn / f with v//vn corners), and procedural
// shape builders for the default catalog.
//

#ifndef CLEARSIM_MESH_H_
#define CLEARSIM_MESH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clearsim/math.h"

namespace clearsim {

struct mesh {
  std::vector<vec3> positions;
  std::vector<vec3> normals;  // same length as positions
  std::vector<std::array<uint32_t, 3>> triangles;

  friend bool operator==(const mesh&, const mesh&) = default;
};

bbox3 mesh_bounds(const mesh& m);

// Signed volume and volume centroid; volume is ~0 for open meshes.
struct mass_properties {
  double volume = 0;
  vec3 centroid;
};
mass_properties compute_mass_properties(const mesh& m);

std::string format_obj(const mesh& m);
mesh parse_obj(const std::string& text);
mesh load_obj(const std::filesystem::path& path);
void save_obj(const mesh& m, const std::filesystem::path& path);

// Shapes are centered on the origin unless stated; +z is up.
mesh make_uv_sphere(double radius, int slices, int stacks);
mesh make_box(const vec3& half_extents);
mesh make_cylinder(double radius, double height, int segments);
// Solid of revolution around z from (radius, z) profile points, bottom to
// top, capped at both ends.
mesh make_lathe(const std::vector<vec2>& profile, int segments);
// Triangular prism along y: cross-section triangle in xz.
mesh make_prism(double base, double height, double depth);
// Square ground plane at z = 0 facing +z.
mesh make_ground_plane(double size);
// Ground plane at z = 0 plus a back wall at y = +size/2 facing -y.
mesh make_corner_backdrop(double size, double wall_height);

}  // namespace clearsim

#endif
