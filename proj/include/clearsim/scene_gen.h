//
// Deterministic stochastic scene composition. Transparent objects are
// "dropped" into a spawn region and settled with a proxy procedure: snap to a
// stable hull facet, apply a random yaw and an impulse-scaled horizontal
// displacement, and rejection-sample against footprint overlap. Props follow
// the same contract. All randomness comes from named substreams of the seed.
//

#ifndef CLEARSIM_SCENE_GEN_H_
#define CLEARSIM_SCENE_GEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "clearsim/catalog.h"
#include "clearsim/rng.h"
#include "clearsim/scene.h"

namespace clearsim {

struct catalog_item {
  std::string mesh;
  double weight = 1;
  double scale = 1;
  material_ref material = glass_material{};
};

struct count_range {
  uint32_t min = 0, max = 0;
};

struct generation_config {
  std::vector<catalog_item> object_catalog;
  count_range object_count = {3, 7};
  bbox3 spawn_region = {{-0.35, -0.35, 0.2}, {0.35, 0.35, 0.5}};
  double drop_height_m = 0.3;
  double impulse_intensity = 0.5;
  std::vector<catalog_item> prop_catalog;
  count_range prop_count = {0, 3};
  std::vector<std::string> backdrop_bank;
  std::vector<std::string> hdri_bank;
  std::vector<camera> camera_rig;
  area_light light_template;
  double depth_range_m = 10;
  uint32_t max_placement_attempts = 200;
};

void validate_generation_config(const generation_config& config, const asset_catalog& catalog);

struct settle_proxy {
  uint32_t object_id = 0;
  double bounding_radius_m = 0;  // horizontal footprint radius
  std::vector<quat> rest_orientations;
  std::vector<double> rest_heights;  // z translation per orientation, scaled
};

settle_proxy make_settle_proxy(
    const asset_catalog& catalog, const std::string& mesh_key, double scale, uint32_t object_id);

// Places the proxy on the z = 0 support plane. The returned translation's xy
// lies within impulse * bounding_radius of spawn_xy; the rotation is a
// stream-drawn yaw composed with a stream-drawn rest orientation.
rigid_transform settle_drop(
    const settle_proxy& proxy, const vec2& spawn_xy, double impulse, rng_stream& stream);

scene generate_scene(const generation_config& config, const asset_catalog& catalog, uint64_t seed);

// Adds props to a scene that already holds settled transparent objects.
scene place_props(const scene& input, const generation_config& config,
    const asset_catalog& catalog, rng_stream& stream);

// Footprint circle of an instance: translation xy and scaled bounding radius.
struct footprint {
  vec2 center;
  double radius = 0;
};
footprint instance_footprint(const object_instance& o, const asset_catalog& catalog);

// Overlap depth beyond which two footprints conflict: 10% of the smaller radius.
bool footprints_conflict(const footprint& a, const footprint& b);

// A tabletop configuration over the default catalog: a 12-camera rig, one
// main light and glassware with default glass.
generation_config default_generation_config(const asset_catalog& catalog, int image_width = 1920,
    int image_height = 1080);

}  // namespace clearsim

#endif
