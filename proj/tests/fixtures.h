// Shared scene fixtures and analytic oracles for the test binaries.

#ifndef CLEARSIM_TESTS_FIXTURES_H_
#define CLEARSIM_TESTS_FIXTURES_H_

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "clearsim/catalog.h"
#include "clearsim/mesh.h"
#include "clearsim/scene.h"

namespace fixtures {

using namespace clearsim;

// Small catalog: a unit sphere fine enough for sub-1e-3 normal error, a
// 20 m ground plane, a glass wedge and constant environments.
inline const asset_catalog& test_catalog() {
  static const asset_catalog catalog = [] {
    auto c = asset_catalog{};
    c.add_mesh("sphere", make_uv_sphere(1.0, 256, 128));
    c.add_mesh("coarse_sphere", make_uv_sphere(1.0, 48, 24));
    c.add_mesh("ground", make_ground_plane(20));
    c.add_mesh("wedge", make_prism(0.2, 0.2, 0.2));
    c.add_mesh("cube", make_box({0.05, 0.05, 0.05}));
    c.add_environment("white", image<rgb32f>(1, 1, {1, 1, 1}));
    c.add_environment("grey", image<rgb32f>(1, 1, {0.25f, 0.25f, 0.25f}));
    c.add_environment("black", image<rgb32f>(1, 1, {0, 0, 0}));
    c.add_texture("stripes", image<rgb32f>(2, 1, {0.2f, 0.2f, 0.2f}));
    c.add_backdrop("floor", {"ground", {{0.8, 0.8, 0.8}, "", 1}});
    return c;
  }();
  return catalog;
}

inline object_instance backdrop_plane(uint32_t id = 100, vec3 albedo = {0.8, 0.8, 0.8}) {
  auto o = object_instance{};
  o.object_id = id;
  o.mesh = "ground";
  o.semantic = semantic_class::backdrop;
  o.material = diffuse_material{albedo, "", 1};
  return o;
}

inline object_instance sphere_at(uint32_t id, const vec3& center, double radius, material_ref m,
    semantic_class c = semantic_class::transparent, const std::string& mesh = "sphere") {
  auto o = object_instance{};
  o.object_id = id;
  o.mesh = mesh;
  o.transform.translation = center;
  o.transform.scale = radius;
  o.material = std::move(m);
  o.semantic = c;
  return o;
}

inline glass_material clear_glass(std::optional<double> abbe = std::nullopt) {
  auto g = glass_material{};
  g.abbe_number = abbe;
  return g;
}

inline scene empty_scene(const std::string& env = "black") {
  auto s = scene{};
  s.seed = 7;
  s.backdrop = backdrop_plane();
  s.environment = {env, 0};
  return s;
}

inline area_light point_light(const vec3& center, const vec3& target, double intensity,
    double cone_half_angle = pi / 4, double radius = 0) {
  auto l = area_light{};
  l.center = center;
  l.direction = normalize(target - center);
  l.intensity = {intensity, intensity, intensity};
  l.cone_half_angle = cone_half_angle;
  l.radius_m = radius;
  return l;
}

// Camera at elevation `elevation_rad` looking at `target` from distance `d`
// along -x.
inline camera orbit_camera(const vec3& target, double d, double elevation_rad, int w, int h,
    double fov_rad) {
  auto eye = target + d * vec3{-std::cos(elevation_rad), 0, std::sin(elevation_rad)};
  return make_look_at_camera(eye, target, w, h, fov_rad);
}

// Nearest ray-sphere intersection distance, if any.
inline std::optional<double> ray_sphere(const ray3& r, const vec3& c, double radius) {
  auto oc = r.origin - c;
  auto b = dot(oc, r.direction);
  auto cc = dot(oc, oc) - radius * radius;
  auto disc = b * b - cc;
  if (disc < 0) return std::nullopt;
  auto sq = std::sqrt(disc);
  auto t = -b - sq;
  if (t <= 0) t = -b + sq;
  if (t <= 0) return std::nullopt;
  return t;
}

// Ball lens geometry: a point source on the axis at distance `s` from the
// centre focuses (paraxially) at distance v = 1/(1/f - 1/s) beyond the
// centre, with f = nR / (2(n - 1)).
inline double ball_lens_focal_length(double n, double radius) { return n * radius / (2 * (n - 1)); }
inline double ball_lens_image_distance(double n, double radius, double s) {
  auto f = ball_lens_focal_length(n, radius);
  return 1 / (1 / f - 1 / s);
}

// A glass ball hovering over the ground plane, lit by a narrow light whose
// axis passes through the centre at `tilt_rad` from vertical, placed so the
// paraxial focus lands on the plane.
struct ball_lens_setup {
  scene s;
  vec3 focus;
  double radius;
};

inline ball_lens_setup ball_lens_scene(double light_radius, double tilt_rad = 0.35, double radius = 0.1,
    double source_distance = 1.0, double intensity = 100, int image_size = 64) {
  auto n = 1.5;
  auto v = ball_lens_image_distance(n, radius, source_distance);
  auto axis = normalize(vec3{std::sin(tilt_rad), 0, -std::cos(tilt_rad)});  // light -> focus
  auto center = vec3{0, 0, v * std::cos(tilt_rad)} - v * vec3{axis.x, axis.y, 0};
  auto focus = center + v * axis;
  auto light_pos = center - source_distance * axis;
  // a cone covering the central fifth of the aperture keeps rays paraxial
  auto cone = std::atan(0.2 * radius / source_distance);

  auto s = empty_scene("black");
  s.backdrop = backdrop_plane(100, {0.8, 0.8, 0.8});
  s.objects.push_back(sphere_at(1, center, radius, clear_glass()));
  s.lights.push_back(point_light(light_pos, center, intensity, cone, light_radius));
  // views the focal spot from the side away from the ball, 55 degrees from vertical
  auto eye = focus + 0.9 * normalize(vec3{std::sin(0.96), 0.35, std::cos(0.96)});
  s.cameras.push_back(make_look_at_camera(eye, focus, image_size, image_size, 0.5));
  return {s, focus, radius};
}

struct temp_dir {
  std::filesystem::path path;
  explicit temp_dir(const std::string& name) {
    path = std::filesystem::temp_directory_path() /
           ("clearsim_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  temp_dir(const temp_dir&) = delete;
  temp_dir& operator=(const temp_dir&) = delete;
};

}  // namespace fixtures

#endif
