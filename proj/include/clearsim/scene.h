//
// Canonical scene representation shared by every stage of the pipeline, its
// invariants, and the key-sorted text serialization used for scene files.
//

#ifndef CLEARSIM_SCENE_H_
#define CLEARSIM_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clearsim/math.h"

namespace clearsim {

class asset_catalog;

// -----------------------------------------------------------------------------
// MATERIALS
// -----------------------------------------------------------------------------

enum class thickness_mode : uint8_t { solid, thin_walled };

struct glass_material {
  double base_ior = 1.5;                    // at the green band
  std::optional<double> abbe_number = 30;   // absent: no dispersion
  double roughness = 0;                     // [0,1]
  vec3 tint = {1, 1, 1};                    // linear RGB
  double specular_scale = 1;                // [0,1]
  thickness_mode thickness = thickness_mode::solid;

  friend bool operator==(const glass_material&, const glass_material&) = default;
};

struct diffuse_material {
  vec3 albedo = {0.8, 0.8, 0.8};
  // Optional catalog texture, planar-mapped on world xy with the given
  // period. When set, it replaces `albedo`.
  std::string texture;
  double texture_scale_m = 1;

  friend bool operator==(const diffuse_material&, const diffuse_material&) = default;
};

using material_ref = std::variant<glass_material, diffuse_material>;

struct band_iors {
  double red = 0, green = 0, blue = 0;
};

// Three-band IORs from (base, Abbe): green = base, blue - red = (base-1)/abbe,
// split symmetrically. Throws domain_error unless base > 1 and abbe > 0.
band_iors dispersion_band_iors(double base_ior, double abbe_number);
band_iors dispersion_band_iors(const glass_material& glass);

// -----------------------------------------------------------------------------
// SCENE
// -----------------------------------------------------------------------------

enum class semantic_class : uint8_t { none = 0, transparent = 1, prop = 2, backdrop = 3 };

struct object_instance {
  uint32_t object_id = 0;  // >= 1, unique within a scene
  std::string mesh;        // catalog key
  rigid_transform transform;
  material_ref material = diffuse_material{};
  semantic_class semantic = semantic_class::prop;

  friend bool operator==(const object_instance&, const object_instance&) = default;
};

// Disc emitter facing `direction`; radius 0 is a point light. Radiant
// intensity is constant inside the cone and zero outside.
struct area_light {
  vec3 center = {0, 0, 2};
  double radius_m = 0;
  vec3 direction = {0, 0, -1};
  double cone_half_angle = pi / 4;
  vec3 intensity = {1, 1, 1};
  bool enabled = true;

  friend bool operator==(const area_light&, const area_light&) = default;
};

struct environment_ref {
  std::string id;  // catalog key
  double rotation_deg = 0;

  friend bool operator==(const environment_ref&, const environment_ref&) = default;
};

// Looks along local -z with local +y up; the pose scale must be 1.
struct camera {
  rigid_transform pose;
  int width = 1920;
  int height = 1080;
  double vertical_fov = pi / 4;
  double exposure_ev = 0;

  friend bool operator==(const camera&, const camera&) = default;
};

camera make_look_at_camera(const vec3& eye, const vec3& target, int width, int height,
    double vertical_fov, const vec3& up = {0, 0, 1});

struct scene {
  uint64_t seed = 0;
  std::vector<object_instance> objects;  // transparent objects
  std::vector<object_instance> props;
  object_instance backdrop;
  std::vector<area_light> lights;
  environment_ref environment;
  std::vector<camera> cameras;
  double depth_range_m = 10;

  friend bool operator==(const scene&, const scene&) = default;
};

// Visits every instance: objects, props, then backdrop.
template <typename Scene, typename Func>
void for_each_instance(Scene& s, Func&& func) {
  for (auto& o : s.objects) func(o);
  for (auto& o : s.props) func(o);
  func(s.backdrop);
}

const object_instance* find_instance(const scene& s, uint32_t object_id);

// Throws validation_error naming the first offending field. Asset references
// are checked when a catalog is given (asset_error when missing).
void validate_scene(const scene& s, const asset_catalog* catalog = nullptr);

// Sorts objects and props by object_id.
scene canonicalize(scene s);

std::string serialize_scene(const scene& s);
scene parse_scene(const std::string& text, const asset_catalog* catalog = nullptr);

scene load_scene(const std::filesystem::path& path, const asset_catalog* catalog = nullptr);
// Validates first; nothing is written for an invalid scene.
void save_scene(const scene& s, const std::filesystem::path& path);

// Field-level differences between two scenes, as paths such as
// "lights[0].pose" or "objects[id=3].material".
std::vector<std::string> structural_diff(const scene& a, const scene& b);

}  // namespace clearsim

#endif
