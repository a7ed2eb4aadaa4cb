//
// The six annotation passes, all computed from the same camera rays as the
// RGB image: normalized depth, world and camera normals, object masks,
// outlines, occlusion boundaries and caustic labels.
//

#ifndef CLEARSIM_GROUNDTRUTH_H_
#define CLEARSIM_GROUNDTRUTH_H_

#include <cstdint>
#include <string>

#include "clearsim/image.h"
#include "clearsim/render.h"

namespace clearsim {

enum class boundary_label : uint8_t { none = 0, occlusion_edge = 1, contact_edge = 2 };
enum class caustic_label : uint8_t { none = 0, local = 1, non_local = 2 };

// clamp(depth / range, 0, 1); misses map to 1.
image<float> depth_pass(const gbuffer& gbuf, double depth_range_m);

// rgb = (n + 1) / 2; misses are black.
image<rgb32f> normals_world_pass(const gbuffer& gbuf);
image<rgb32f> normals_camera_pass(const gbuffer& gbuf, const camera& cam);
vec3 encode_normal(const vec3& n);
vec3 decode_normal(const vec3& rgb);

// Bit set of semantic classes a mask keeps.
struct class_filter {
  uint8_t bits = 0;
  static class_filter all() { return {0b1110}; }
  static class_filter transparent() { return {0b0010}; }
  static class_filter only(semantic_class c) { return {uint8_t(1u << static_cast<int>(c))}; }
  bool passes(semantic_class c) const { return (bits >> static_cast<int>(c)) & 1; }
};
// Parses "all", "transparent", "prop" or "backdrop" (validation_error otherwise).
class_filter parse_class_filter(const std::string& name);

image<uint32_t> mask_pass(const gbuffer& gbuf, class_filter filter);

// Pixels whose label differs from a 4-neighbour.
image<uint8_t> label_transitions(const image<uint32_t>& mask);

// A band of width `thickness_px` centred on the label transitions: pixel set
// when its chessboard distance to a transition pixel is below ceil(t/2).
image<uint8_t> outline_pass(const image<uint32_t>& mask, uint32_t thickness_px);

// Transition pixels compare depth against 4-neighbours of a different label;
// the largest jump above the threshold is an occlusion edge, otherwise a
// contact edge.
image<boundary_label> boundary_pass(
    const gbuffer& gbuf, const image<uint32_t>& mask, double depth_jump_threshold_m);

// Labels pixels whose luminance rises by more than tau with caustics on;
// transparent first hits are local, everything else non-local. Throws
// domain_error on shape mismatch and validation_error when the images are
// not an on/off pair of the same frame.
image<caustic_label> caustics_pass(const radiance_image& on, const radiance_image& off,
    const gbuffer& gbuf, double tau);

// File encodings: 0/128/255 for none/contact/occlusion and none/local/non_local.
image<uint8_t> encode_boundary(const image<boundary_label>& b);
image<uint8_t> encode_caustics(const image<caustic_label>& c);
image<rgb8> quantize_rgb(const image<rgb32f>& img);
// Throws domain_error for ids above 65535.
image<uint16_t> mask_to_u16(const image<uint32_t>& mask);

}  // namespace clearsim

#endif
