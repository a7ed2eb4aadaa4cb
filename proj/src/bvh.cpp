#include "clearsim/bvh.h"

#include <algorithm>
#include <array>

#include "clearsim/error.h"

namespace clearsim {

std::optional<triangle_hit> intersect_triangle(const ray3& ray, const triangle& tri, uint32_t index) {
  auto e1 = tri.v1 - tri.v0;
  auto e2 = tri.v2 - tri.v0;
  auto p = cross(ray.direction, e2);
  auto det = dot(e1, p);
  if (det == 0) return std::nullopt;
  auto inv = 1 / det;
  auto s = ray.origin - tri.v0;
  auto u = dot(s, p) * inv;
  if (u < 0 || u > 1) return std::nullopt;
  auto q = cross(s, e1);
  auto v = dot(ray.direction, q) * inv;
  if (v < 0 || u + v > 1) return std::nullopt;
  auto t = dot(e2, q) * inv;
  if (!(t > ray.tmin && t < ray.tmax)) return std::nullopt;
  return triangle_hit{t, index, u, v};
}

namespace {

constexpr int max_sah_depth = 40;
constexpr int stack_size = 128;

bool closer(const triangle_hit& a, const std::optional<triangle_hit>& best) {
  return !best || a.t < best->t || (a.t == best->t && a.primitive < best->primitive);
}

bool degenerate(const triangle& t) {
  return length_squared(cross(t.v1 - t.v0, t.v2 - t.v0)) == 0;
}

// Slab test; returns the entry distance or +inf on a miss.
double hit_box(const bbox3& b, const vec3& origin, const vec3& inv_dir, double tmin, double tmax) {
  for (int a = 0; a < 3; a++) {
    auto t0 = (b.min[a] - origin[a]) * inv_dir[a];
    auto t1 = (b.max[a] - origin[a]) * inv_dir[a];
    if (inv_dir[a] < 0) std::swap(t0, t1);
    // NaN from 0 * inf keeps the current interval
    tmin = t0 > tmin ? t0 : tmin;
    tmax = t1 < tmax ? t1 : tmax;
    if (tmax < tmin) return infinity;
  }
  return tmin;
}

bbox3 triangle_bounds(const triangle& t) {
  auto b = bbox3{};
  b.expand(t.v0);
  b.expand(t.v1);
  b.expand(t.v2);
  return b;
}

}  // namespace

std::optional<triangle_hit> intersect_brute_force(const ray3& ray, std::span<const triangle> tris) {
  auto best = std::optional<triangle_hit>{};
  for (uint32_t i = 0; i < tris.size(); i++) {
    if (auto h = intersect_triangle(ray, tris[i], i); h && closer(*h, best)) best = h;
  }
  return best;
}

bvh::bvh(std::span<const triangle> triangles) : triangles_(triangles.begin(), triangles.end()) {
  if (triangles.empty()) throw domain_error("bvh: empty geometry");
  auto boxes = std::vector<bbox3>(triangles.size());
  auto centroids = std::vector<vec3>(triangles.size());
  for (uint32_t i = 0; i < triangles.size(); i++) {
    auto& t = triangles[i];
    if (!isfinite(t.v0) || !isfinite(t.v1) || !isfinite(t.v2))
      throw domain_error("bvh: non-finite vertex in triangle " + std::to_string(i));
    if (degenerate(t)) {
      degenerate_++;
      continue;
    }
    boxes[i] = triangle_bounds(t);
    centroids[i] = boxes[i].center();
    indices_.push_back(i);
  }
  if (indices_.empty()) throw domain_error("bvh: every triangle is degenerate");
  nodes_.reserve(2 * indices_.size() / max_leaf_size + 1);
  build(0, static_cast<uint32_t>(indices_.size()), boxes, centroids, 0);
}

uint32_t bvh::build(uint32_t begin, uint32_t end, std::vector<bbox3>& boxes,
    std::vector<vec3>& centroids, int depth) {
  auto node_index = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back({});
  auto bounds = bbox3{};
  auto centroid_bounds = bbox3{};
  for (auto i = begin; i < end; i++) {
    bounds.expand(boxes[indices_[i]]);
    centroid_bounds.expand(centroids[indices_[i]]);
  }
  // padded so rounding in the slab test never culls a boundary hit
  auto pad = 1e-9 * std::max({1.0, max_component(max(-bounds.min, bounds.max))});
  bounds.min -= vec3{pad, pad, pad};
  bounds.max += vec3{pad, pad, pad};
  nodes_[node_index].bounds = bounds;
  auto count = end - begin;
  auto make_leaf = [&] {
    nodes_[node_index].first = begin;
    nodes_[node_index].count = static_cast<uint16_t>(count);
    return node_index;
  };
  if (count <= max_leaf_size) return make_leaf();

  constexpr int bins = 16;
  auto best_cost = infinity;
  int best_axis = -1, best_split = 0;
  auto extent = centroid_bounds.extent();
  for (int axis = 0; axis < 3 && depth < max_sah_depth; axis++) {
    if (!(extent[axis] > 0)) continue;
    auto scale = bins / extent[axis];
    auto bin_of = [&](uint32_t prim) {
      return std::min(bins - 1, static_cast<int>((centroids[prim][axis] - centroid_bounds.min[axis]) * scale));
    };
    std::array<bbox3, bins> bin_box;
    std::array<uint32_t, bins> bin_count{};
    for (auto i = begin; i < end; i++) {
      auto b = bin_of(indices_[i]);
      bin_box[b].expand(boxes[indices_[i]]);
      bin_count[b]++;
    }
    std::array<double, bins> right_area{};
    std::array<uint32_t, bins> right_count{};
    auto acc = bbox3{};
    uint32_t n = 0;
    for (int b = bins - 1; b > 0; b--) {
      acc.expand(bin_box[b]);
      n += bin_count[b];
      right_area[b] = acc.surface_area();
      right_count[b] = n;
    }
    acc = {};
    n = 0;
    for (int b = 0; b < bins - 1; b++) {
      acc.expand(bin_box[b]);
      n += bin_count[b];
      if (n == 0 || right_count[b + 1] == 0) continue;
      auto cost = acc.surface_area() * n + right_area[b + 1] * right_count[b + 1];
      if (cost < best_cost) {
        best_cost = cost;
        best_axis = axis;
        best_split = b;
      }
    }
  }

  uint32_t mid;
  if (best_axis < 0) {
    // deep or coincident: median split on the widest centroid axis
    best_axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : (extent.y >= extent.z ? 1 : 2);
    mid = begin + count / 2;
    std::nth_element(indices_.begin() + begin, indices_.begin() + mid, indices_.begin() + end,
        [&](uint32_t a, uint32_t b) {
          auto ca = centroids[a][best_axis], cb = centroids[b][best_axis];
          return ca < cb || (ca == cb && a < b);
        });
  } else {
    auto scale = bins / extent[best_axis];
    auto it = std::partition(indices_.begin() + begin, indices_.begin() + end, [&](uint32_t prim) {
      auto b = std::min(bins - 1,
          static_cast<int>((centroids[prim][best_axis] - centroid_bounds.min[best_axis]) * scale));
      return b <= best_split;
    });
    mid = static_cast<uint32_t>(it - indices_.begin());
    if (mid == begin || mid == end) mid = begin + count / 2;
  }
  nodes_[node_index].axis = static_cast<uint8_t>(best_axis);
  build(begin, mid, boxes, centroids, depth + 1);
  auto right = build(mid, end, boxes, centroids, depth + 1);
  nodes_[node_index].first = right;
  nodes_[node_index].count = 0;
  return node_index;
}

std::optional<triangle_hit> bvh::intersect(const ray3& ray) const {
  auto best = std::optional<triangle_hit>{};
  if (nodes_.empty()) return best;
  auto inv_dir = vec3{1 / ray.direction.x, 1 / ray.direction.y, 1 / ray.direction.z};
  bool negative[3] = {ray.direction.x < 0, ray.direction.y < 0, ray.direction.z < 0};
  uint32_t stack[stack_size];
  int top = 0;
  stack[top++] = 0;
  auto r = ray;
  while (top > 0) {
    auto& node = nodes_[stack[--top]];
    // an equal-t hit with a smaller index may still sit in a box entered at exactly best t
    auto limit = best ? best->t : r.tmax;
    auto entry = hit_box(node.bounds, r.origin, inv_dir, r.tmin, limit);
    if (entry == infinity || entry > limit) continue;
    if (node.count > 0) {
      for (uint32_t i = node.first; i < node.first + node.count; i++) {
        auto prim = indices_[i];
        auto probe = r;
        if (best) probe.tmax = std::nextafter(best->t, infinity);
        if (auto h = intersect_triangle(probe, triangles_[prim], prim); h && closer(*h, best)) best = h;
      }
    } else {
      auto self = static_cast<uint32_t>(&node - nodes_.data());
      auto left = self + 1, right = node.first;
      if (negative[node.axis]) {
        stack[top++] = left;
        stack[top++] = right;
      } else {
        stack[top++] = right;
        stack[top++] = left;
      }
    }
  }
  return best;
}

bool bvh::occluded(const ray3& ray) const {
  if (nodes_.empty()) return false;
  auto inv_dir = vec3{1 / ray.direction.x, 1 / ray.direction.y, 1 / ray.direction.z};
  uint32_t stack[stack_size];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    auto& node = nodes_[stack[--top]];
    if (hit_box(node.bounds, ray.origin, inv_dir, ray.tmin, ray.tmax) == infinity) continue;
    if (node.count > 0) {
      for (uint32_t i = node.first; i < node.first + node.count; i++)
        if (intersect_triangle(ray, triangles_[indices_[i]], indices_[i])) return true;
    } else {
      auto self = static_cast<uint32_t>(&node - nodes_.data());
      stack[top++] = node.first;
      stack[top++] = self + 1;
    }
  }
  return false;
}

}  // namespace clearsim
