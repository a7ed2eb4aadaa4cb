#ifndef CLEARSIM_IMAGE_H_
#define CLEARSIM_IMAGE_H_

#include <array>
#include <cstdint>
#include <vector>

#include "clearsim/math.h"

namespace clearsim {

// Row-major raster, row 0 at the top.
template <typename T>
struct image {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;

  image() = default;
  image(int w, int h, const T& value = T{})
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, value) {}

  T& operator()(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  const T& operator()(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return pixels.size(); }
  bool same_shape(const auto& other) const {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const image&, const image&) = default;
};

struct rgb8 {
  uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const rgb8&, const rgb8&) = default;
};

struct rgb32f {
  float r = 0, g = 0, b = 0;
  friend bool operator==(const rgb32f&, const rgb32f&) = default;
};

inline vec3 to_vec3(const rgb32f& c) { return {c.r, c.g, c.b}; }
inline rgb32f to_rgb32f(const vec3& v) {
  return {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
}

}  // namespace clearsim

#endif
