//
// Bounding volume hierarchy over world-space triangles, built with binned SAH.
// Closest-hit queries break exact ties on the smallest primitive index so the
// result matches a brute-force scan bit for bit.
//

#ifndef CLEARSIM_BVH_H_
#define CLEARSIM_BVH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clearsim/math.h"

namespace clearsim {

struct triangle {
  vec3 v0, v1, v2;
};

struct triangle_hit {
  double t = infinity;
  uint32_t primitive = 0;  // index into the input triangle list
  double u = 0, v = 0;     // barycentrics of v1 and v2
};

// Moller-Trumbore; hits with t in (ray.tmin, ray.tmax) only.
std::optional<triangle_hit> intersect_triangle(const ray3& ray, const triangle& tri, uint32_t index);

// Reference nearest hit over every triangle.
std::optional<triangle_hit> intersect_brute_force(const ray3& ray, std::span<const triangle> tris);

struct bvh_node {
  bbox3 bounds;
  uint32_t first = 0;  // leaf: first slot in the index permutation; inner: right child
  uint16_t count = 0;  // > 0 for leaves
  uint8_t axis = 0;
};

class bvh {
 public:
  static constexpr int max_leaf_size = 4;

  bvh() = default;
  // Throws domain_error for empty input or non-finite vertices. Zero-area
  // triangles are left out and counted.
  explicit bvh(std::span<const triangle> triangles);

  std::optional<triangle_hit> intersect(const ray3& ray) const;
  bool occluded(const ray3& ray) const;

  const std::vector<bvh_node>& nodes() const { return nodes_; }
  const std::vector<uint32_t>& indices() const { return indices_; }
  const std::vector<triangle>& triangles() const { return triangles_; }
  size_t degenerate_count() const { return degenerate_; }

 private:
  uint32_t build(uint32_t begin, uint32_t end, std::vector<bbox3>& boxes,
      std::vector<vec3>& centroids, int depth);

  std::vector<bvh_node> nodes_;
  std::vector<uint32_t> indices_;
  std::vector<triangle> triangles_;
  size_t degenerate_ = 0;
};

}  // namespace clearsim

#endif
