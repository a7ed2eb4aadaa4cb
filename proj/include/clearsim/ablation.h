//
// Composition-preserving scene mutations. A delta may touch lights, the
// environment, the backdrop material, glass parameters, camera exposure and
// pose, and render settings; it has no way to express a change to object
// transforms, meshes, semantic classes or the object set.
//

#ifndef CLEARSIM_ABLATION_H_
#define CLEARSIM_ABLATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clearsim/render.h"
#include "clearsim/scene.h"

namespace clearsim {

// Rotation of one light about an axis through a pivot (default: the backdrop
// origin).
struct light_rotation {
  double angle_deg = 0;
  vec3 axis = {0, 0, 1};
  std::optional<vec3> pivot;
  uint32_t light_index = 0;
};

struct glass_override {
  std::optional<double> roughness;
  std::optional<vec3> tint;
  std::optional<double> specular_scale;
  std::optional<double> base_ior;
  std::optional<double> abbe_number;  // 0 clears dispersion
  std::optional<thickness_mode> thickness;
};

struct camera_override {
  std::optional<double> exposure_ev;
  std::optional<rigid_transform> pose;
};

struct render_override {
  std::optional<uint32_t> samples_per_pixel;
  std::optional<uint32_t> max_bounces;
  std::optional<bool> caustics_enabled;
  std::optional<uint32_t> photon_count;
  std::optional<double> photon_gather_radius_m;
  std::optional<double> exposure_ev;
};

struct ablation_delta {
  std::string tag;
  std::optional<light_rotation> rotate_light;
  std::optional<vec3> light_color;
  std::optional<double> light_radius_m;
  std::optional<std::string> hdri_id;
  std::optional<double> hdri_rotation_deg;
  std::optional<diffuse_material> backdrop_material;
  std::map<uint32_t, glass_override> glass_overrides;
  std::map<uint32_t, camera_override> camera_overrides;  // keyed by camera index
  render_override render;

  bool empty() const;
};

// Throws validation_error for unknown keys and for any geometry field.
ablation_delta parse_delta(const std::string& text);
ablation_delta load_delta(const std::filesystem::path& path);
std::string serialize_delta(const ablation_delta& delta);

// Throws validation_error for unknown object ids, non-glass targets and
// out-of-range light or camera indices; the result is validated.
scene apply_delta(const scene& s, const ablation_delta& delta);
render_settings apply_render_override(const render_settings& settings, const ablation_delta& delta);

struct sweep_entry {
  scene derived;
  render_settings settings;
  std::string tag;
};

// Each delta applies to the base scene independently. Duplicate tags are a
// validation_error.
std::vector<sweep_entry> sweep(
    const scene& base, const std::vector<ablation_delta>& deltas, const render_settings& settings);

// Light rotation delta with a tag derived from the angle, e.g. "light_30" or
// "light_m22p5".
ablation_delta light_angle_delta(double angle_deg);
std::string light_angle_tag(double angle_deg);

}  // namespace clearsim

#endif
