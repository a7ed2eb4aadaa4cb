#include "clearsim/groundtruth.h"

#include <cmath>
#include <limits>

#include "clearsim/error.h"

namespace clearsim {

image<float> depth_pass(const gbuffer& gbuf, double depth_range_m) {
  if (!(depth_range_m > 0)) throw domain_error("depth_range_m must be positive");
  auto out = image<float>(gbuf.width(), gbuf.height());
  for (size_t i = 0; i < out.pixels.size(); i++) {
    auto& t = gbuf.texels.pixels[i];
    out.pixels[i] = t.object_id == 0 ? 1.0f
                                     : static_cast<float>(std::clamp(t.depth_m / depth_range_m, 0.0, 1.0));
  }
  return out;
}

vec3 encode_normal(const vec3& n) { return (n + vec3{1, 1, 1}) * 0.5; }
vec3 decode_normal(const vec3& rgb) { return rgb * 2.0 - vec3{1, 1, 1}; }

namespace {

template <typename Transform>
image<rgb32f> encode_normals(const gbuffer& gbuf, Transform&& transform) {
  auto out = image<rgb32f>(gbuf.width(), gbuf.height());
  for (size_t i = 0; i < out.pixels.size(); i++) {
    auto& t = gbuf.texels.pixels[i];
    if (t.object_id != 0) out.pixels[i] = to_rgb32f(encode_normal(transform(t.world_normal)));
  }
  return out;
}

}  // namespace

image<rgb32f> normals_world_pass(const gbuffer& gbuf) {
  return encode_normals(gbuf, [](const vec3& n) { return n; });
}

image<rgb32f> normals_camera_pass(const gbuffer& gbuf, const camera& cam) {
  return encode_normals(gbuf, [&](const vec3& n) { return cam.pose.inverse_vector(n); });
}

class_filter parse_class_filter(const std::string& name) {
  if (name == "all") return class_filter::all();
  if (name == "transparent") return class_filter::transparent();
  if (name == "prop") return class_filter::only(semantic_class::prop);
  if (name == "backdrop") return class_filter::only(semantic_class::backdrop);
  throw validation_error("mask_filter", "unknown class filter '" + name + "'");
}

image<uint32_t> mask_pass(const gbuffer& gbuf, class_filter filter) {
  auto out = image<uint32_t>(gbuf.width(), gbuf.height());
  for (size_t i = 0; i < out.pixels.size(); i++) {
    auto& t = gbuf.texels.pixels[i];
    if (t.object_id != 0 && filter.passes(t.semantic)) out.pixels[i] = t.object_id;
  }
  return out;
}

image<uint8_t> label_transitions(const image<uint32_t>& mask) {
  auto out = image<uint8_t>(mask.width, mask.height);
  for (int y = 0; y < mask.height; y++) {
    for (int x = 0; x < mask.width; x++) {
      auto v = mask(x, y);
      auto differs = (x > 0 && mask(x - 1, y) != v) || (x + 1 < mask.width && mask(x + 1, y) != v) ||
                     (y > 0 && mask(x, y - 1) != v) || (y + 1 < mask.height && mask(x, y + 1) != v);
      out(x, y) = differs ? 1 : 0;
    }
  }
  return out;
}

image<uint8_t> outline_pass(const image<uint32_t>& mask, uint32_t thickness_px) {
  if (thickness_px < 1) throw domain_error("outline thickness must be at least 1");
  auto radius = static_cast<int>((thickness_px + 1) / 2) - 1;
  auto edges = label_transitions(mask);
  if (radius == 0) return edges;
  // chessboard dilation is separable: a horizontal then a vertical max filter
  auto w = mask.width, h = mask.height;
  auto rows = image<uint8_t>(w, h);
  for (int y = 0; y < h; y++) {
    auto last = -radius - 1;  // most recent edge column at or left of x + radius
    for (int x = 0; x < w + radius; x++) {
      if (x < w && edges(x, y)) last = x;
      auto cx = x - radius;
      if (cx >= 0 && cx < w) rows(cx, y) = last >= cx - radius ? 1 : 0;
    }
  }
  auto out = image<uint8_t>(w, h);
  for (int x = 0; x < w; x++) {
    auto last = -radius - 1;
    for (int y = 0; y < h + radius; y++) {
      if (y < h && rows(x, y)) last = y;
      auto cy = y - radius;
      if (cy >= 0 && cy < h) out(x, cy) = last >= cy - radius ? 1 : 0;
    }
  }
  return out;
}

image<boundary_label> boundary_pass(
    const gbuffer& gbuf, const image<uint32_t>& mask, double depth_jump_threshold_m) {
  if (!(depth_jump_threshold_m > 0)) throw domain_error("depth jump threshold must be positive");
  if (!gbuf.texels.same_shape(mask)) throw domain_error("boundary_pass: mask and gbuffer shapes differ");
  auto out = image<boundary_label>(mask.width, mask.height);
  const int dx[] = {-1, 1, 0, 0}, dy[] = {0, 0, -1, 1};
  for (int y = 0; y < mask.height; y++) {
    for (int x = 0; x < mask.width; x++) {
      auto v = mask(x, y);
      auto transition = false;
      auto jump = 0.0;
      for (int k = 0; k < 4; k++) {
        auto nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height || mask(nx, ny) == v) continue;
        transition = true;
        auto a = gbuf.texels(x, y).depth_m, b = gbuf.texels(nx, ny).depth_m;
        auto d = (std::isinf(a) || std::isinf(b)) ? (a == b ? 0.0 : infinity) : std::abs(a - b);
        jump = std::max(jump, d);
      }
      if (transition)
        out(x, y) = jump > depth_jump_threshold_m ? boundary_label::occlusion_edge
                                                  : boundary_label::contact_edge;
    }
  }
  return out;
}

image<caustic_label> caustics_pass(const radiance_image& on, const radiance_image& off,
    const gbuffer& gbuf, double tau) {
  if (!on.texels.same_shape(off.texels) || !on.texels.same_shape(gbuf.texels))
    throw domain_error("caustics_pass: image dimensions differ");
  if (on.pair_hash != off.pair_hash)
    throw validation_error("caustics_pass", "images are not an on/off pair of the same frame");
  if (!(tau > 0)) throw domain_error("caustics_pass: tau must be positive");
  auto out = image<caustic_label>(gbuf.width(), gbuf.height());
  for (size_t i = 0; i < out.pixels.size(); i++) {
    auto l_on = luminance(to_vec3(on.texels.pixels[i]));
    auto l_off = luminance(to_vec3(off.texels.pixels[i]));
    if (l_on - l_off > tau)
      out.pixels[i] = gbuf.texels.pixels[i].is_transparent_hit ? caustic_label::local
                                                               : caustic_label::non_local;
  }
  return out;
}

image<uint8_t> encode_boundary(const image<boundary_label>& b) {
  auto out = image<uint8_t>(b.width, b.height);
  for (size_t i = 0; i < b.pixels.size(); i++) {
    auto v = b.pixels[i];
    out.pixels[i] = v == boundary_label::none ? 0 : (v == boundary_label::contact_edge ? 128 : 255);
  }
  return out;
}

image<uint8_t> encode_caustics(const image<caustic_label>& c) {
  auto out = image<uint8_t>(c.width, c.height);
  for (size_t i = 0; i < c.pixels.size(); i++) {
    auto v = c.pixels[i];
    out.pixels[i] = v == caustic_label::none ? 0 : (v == caustic_label::local ? 128 : 255);
  }
  return out;
}

image<rgb8> quantize_rgb(const image<rgb32f>& img) {
  auto q = [](float v) {
    return static_cast<uint8_t>(std::lround(std::clamp(double(v), 0.0, 1.0) * 255));
  };
  auto out = image<rgb8>(img.width, img.height);
  for (size_t i = 0; i < img.pixels.size(); i++)
    out.pixels[i] = {q(img.pixels[i].r), q(img.pixels[i].g), q(img.pixels[i].b)};
  return out;
}

image<uint16_t> mask_to_u16(const image<uint32_t>& mask) {
  auto out = image<uint16_t>(mask.width, mask.height);
  for (size_t i = 0; i < mask.pixels.size(); i++) {
    if (mask.pixels[i] > std::numeric_limits<uint16_t>::max())
      throw domain_error("object id " + std::to_string(mask.pixels[i]) + " does not fit 16 bits");
    out.pixels[i] = static_cast<uint16_t>(mask.pixels[i]);
  }
  return out;
}

}  // namespace clearsim
