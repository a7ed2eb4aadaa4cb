//
// CPU path tracer. Direct light uses next-event estimation to the disc
// lights, indirect light is cosine-sampled, and caustics come from a photon
// map gathered at the first diffuse vertex of each camera path. Every pixel
// sample draws from its own counter-based stream, so images do not depend on
// tile size or thread count.
//

#ifndef CLEARSIM_RENDER_H_
#define CLEARSIM_RENDER_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "clearsim/bvh.h"
#include "clearsim/catalog.h"
#include "clearsim/image.h"
#include "clearsim/photon_map.h"
#include "clearsim/rng.h"
#include "clearsim/scene.h"

namespace clearsim {

enum class tonemap_mode : uint8_t { linear_clamp, gamma_srgb };

struct render_settings {
  uint32_t samples_per_pixel = 16;
  uint32_t max_bounces = 6;
  bool caustics_enabled = true;
  uint32_t photon_count = 200000;
  double photon_gather_radius_m = 0.01;
  uint64_t frame_seed = 0;
  tonemap_mode tonemap = tonemap_mode::gamma_srgb;
  double exposure_ev = 0;

  friend bool operator==(const render_settings&, const render_settings&) = default;
};

void validate_settings(const render_settings& settings);
uint64_t settings_hash(const render_settings& settings);

// Scheduling only; never changes the output.
struct execution_options {
  int tile_size = 16;
  int threads = 0;  // 0: hardware concurrency
};

struct gbuffer_texel {
  uint32_t object_id = 0;  // 0: miss
  semantic_class semantic = semantic_class::none;
  bool is_transparent_hit = false;
  double depth_m = infinity;  // along the optical axis
  vec3 world_normal;          // shading normal, unit; zero on a miss
  vec3 world_position;
};

struct gbuffer {
  image<gbuffer_texel> texels;
  int width() const { return texels.width; }
  int height() const { return texels.height; }
};

struct radiance_image {
  image<rgb32f> texels;  // linear, finite, >= 0
  // Equal for two renders that differ only in caustics_enabled.
  uint64_t pair_hash = 0;
  bool caustics_enabled = false;
  double camera_exposure_ev = 0;
};

// Scene flattened to world space with its BVH, textures and environment.
class render_context {
 public:
  render_context(const scene& s, const asset_catalog& catalog);
  ~render_context();
  render_context(const render_context&) = delete;
  render_context& operator=(const render_context&) = delete;

  const scene& source() const;
  struct impl;
  const impl& internals() const { return *impl_; }

 private:
  std::unique_ptr<impl> impl_;
};

// Photons emitted from every enabled light and stored at the first diffuse
// surface after at least one glass interaction.
photon_map trace_photons(const render_context& context, const render_settings& settings,
    const execution_options& exec = {});

gbuffer render_gbuffer(const render_context& context, int camera_index,
    const execution_options& exec = {});

struct frame_render {
  radiance_image radiance;
  gbuffer gbuf;
};

// Throws render_error for an invalid camera index. When `photons` is null
// and caustics are enabled, the map is traced first.
frame_render render_frame(const render_context& context, int camera_index,
    const render_settings& settings, const execution_options& exec = {},
    const photon_map* photons = nullptr);

frame_render render_frame(const scene& s, const asset_catalog& catalog, int camera_index,
    const render_settings& settings, const execution_options& exec = {});

// Linear scale by 2^(settings.exposure_ev + camera exposure), then the
// transfer curve and 8-bit quantization.
image<rgb8> tone_map(const radiance_image& img, const render_settings& settings);
uint8_t tone_map_value(double linear, double exposure_ev, tonemap_mode mode);

// World-space ray through a pixel position (pixel units, row 0 at the top).
ray3 camera_ray(const camera& cam, double px, double py);
vec3 camera_forward(const camera& cam);

// Content hash of a scene's canonical serialization.
uint64_t scene_hash(const scene& s);

}  // namespace clearsim

#endif
