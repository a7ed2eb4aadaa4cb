#include "clearsim/hull.h"

#include <algorithm>
#include <tuple>
#include <unordered_map>

#include "clearsim/error.h"

namespace clearsim {

namespace {

struct hull_face {
  std::array<uint32_t, 3> v;
  vec3 normal;
  double offset;
  bool alive = true;
};

uint64_t edge_key(uint32_t a, uint32_t b) { return (uint64_t(a) << 32) | b; }

}  // namespace

convex_hull compute_convex_hull(std::span<const vec3> input) {
  auto pts = std::vector<vec3>(input.begin(), input.end());
  auto lex = [](const vec3& a, const vec3& b) {
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
  };
  std::sort(pts.begin(), pts.end(), lex);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 4) throw domain_error("convex hull needs at least 4 distinct points");

  auto bounds = bbox3{};
  for (auto& p : pts) bounds.expand(p);
  auto eps = 1e-10 * std::max(length(bounds.extent()), 1e-300);

  // initial simplex
  uint32_t i0 = 0, i1 = 0;
  for (uint32_t i = 0; i < pts.size(); i++)
    if (length_squared(pts[i] - pts[0]) > length_squared(pts[i1] - pts[0])) i1 = i;
  for (uint32_t i = 0; i < pts.size(); i++)
    if (length_squared(pts[i] - pts[i1]) > length_squared(pts[i0] - pts[i1])) i0 = i;
  auto axis = normalize(pts[i1] - pts[i0]);
  uint32_t i2 = i0;
  auto best = 0.0;
  for (uint32_t i = 0; i < pts.size(); i++) {
    auto d = length(cross(pts[i] - pts[i0], axis));
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) throw domain_error("convex hull: points are collinear");
  auto plane_n = normalize(cross(pts[i1] - pts[i0], pts[i2] - pts[i0]));
  uint32_t i3 = i0;
  best = 0;
  for (uint32_t i = 0; i < pts.size(); i++) {
    auto d = std::abs(dot(pts[i] - pts[i0], plane_n));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw domain_error("convex hull: points are coplanar");

  auto faces = std::vector<hull_face>{};
  auto edges = std::unordered_map<uint64_t, uint32_t>{};
  auto interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) * 0.25;
  auto add_face = [&](uint32_t a, uint32_t b, uint32_t c) {
    auto n = normalize(cross(pts[b] - pts[a], pts[c] - pts[a]));
    auto f = hull_face{{a, b, c}, n, dot(n, pts[a])};
    auto index = uint32_t(faces.size());
    faces.push_back(f);
    edges[edge_key(a, b)] = index;
    edges[edge_key(b, c)] = index;
    edges[edge_key(c, a)] = index;
  };
  auto add_oriented = [&](uint32_t a, uint32_t b, uint32_t c) {
    auto n = cross(pts[b] - pts[a], pts[c] - pts[a]);
    if (dot(n, interior - pts[a]) > 0) std::swap(b, c);
    add_face(a, b, c);
  };
  add_oriented(i0, i1, i2);
  add_oriented(i0, i1, i3);
  add_oriented(i0, i2, i3);
  add_oriented(i1, i2, i3);

  auto visible = std::vector<char>{};
  auto horizon = std::vector<std::pair<uint32_t, uint32_t>>{};
  auto visible_list = std::vector<uint32_t>{};
  for (uint32_t pi = 0; pi < pts.size(); pi++) {
    if (pi == i0 || pi == i1 || pi == i2 || pi == i3) continue;
    auto& p = pts[pi];
    visible.assign(faces.size(), 0);
    visible_list.clear();
    for (uint32_t f = 0; f < faces.size(); f++) {
      if (faces[f].alive && dot(faces[f].normal, p) - faces[f].offset > eps) {
        visible[f] = 1;
        visible_list.push_back(f);
      }
    }
    if (visible_list.empty()) continue;
    horizon.clear();
    for (auto f : visible_list) {
      auto& v = faces[f].v;
      for (int k = 0; k < 3; k++) {
        auto a = v[k], b = v[(k + 1) % 3];
        auto twin = edges.find(edge_key(b, a));
        if (twin == edges.end() || !visible[twin->second]) horizon.emplace_back(a, b);
      }
    }
    for (auto f : visible_list) {
      faces[f].alive = false;
      auto& v = faces[f].v;
      for (int k = 0; k < 3; k++) {
        auto it = edges.find(edge_key(v[k], v[(k + 1) % 3]));
        if (it != edges.end() && it->second == f) edges.erase(it);
      }
    }
    for (auto [a, b] : horizon) add_face(a, b, pi);
  }

  auto hull = convex_hull{};
  auto remap = std::unordered_map<uint32_t, uint32_t>{};
  for (auto& f : faces) {
    if (!f.alive) continue;
    auto tri = std::array<uint32_t, 3>{};
    for (int k = 0; k < 3; k++) {
      auto [it, inserted] = remap.try_emplace(f.v[k], uint32_t(hull.points.size()));
      if (inserted) hull.points.push_back(pts[f.v[k]]);
      tri[k] = it->second;
    }
    hull.faces.push_back(tri);
  }
  return hull;
}

settle_shape compute_settle_shape(const mesh& m, size_t max_poses) {
  auto shape = settle_shape{};
  for (auto& p : m.positions) shape.bounding_radius = std::max(shape.bounding_radius, length(p));

  auto hull = compute_convex_hull(m.positions);
  auto hull_mesh = mesh{hull.points, {}, hull.faces};
  auto hull_mass = compute_mass_properties(hull_mesh);
  auto mesh_mass = compute_mass_properties(m);
  auto center = mesh_mass.volume > 1e-3 * hull_mass.volume ? mesh_mass.centroid : hull_mass.centroid;

  auto scale = length(mesh_bounds(m).extent());
  struct facet {
    vec3 normal;
    double offset;
    double area = 0;
    bool supports_center = false;
  };
  auto facets = std::vector<facet>{};
  for (auto& f : hull.faces) {
    auto& a = hull.points[f[0]];
    auto& b = hull.points[f[1]];
    auto& c = hull.points[f[2]];
    auto cr = cross(b - a, c - a);
    auto area = length(cr) / 2;
    if (area <= 0) continue;
    auto n = cr / (2 * area);
    auto d = dot(n, a);
    auto it = std::find_if(facets.begin(), facets.end(), [&](const facet& g) {
      return dot(g.normal, n) > 1 - 1e-9 && std::abs(g.offset - d) <= 1e-9 * scale;
    });
    if (it == facets.end()) {
      facets.push_back({n, d});
      it = facets.end() - 1;
    }
    it->area += area;
    // does the center of mass project inside this triangle?
    auto q = center - n * (dot(n, center) - d);
    auto inside = true;
    for (int k = 0; k < 3 && inside; k++) {
      auto& p0 = hull.points[f[k]];
      auto& p1 = hull.points[f[(k + 1) % 3]];
      inside = dot(cross(p1 - p0, q - p0), n) >= -1e-12 * scale * scale;
    }
    if (inside) it->supports_center = true;
  }

  auto stable = std::vector<facet>{};
  for (auto& f : facets)
    if (f.supports_center) stable.push_back(f);
  std::sort(stable.begin(), stable.end(), [](const facet& a, const facet& b) {
    if (a.area != b.area) return a.area > b.area;
    return std::tie(a.normal.x, a.normal.y, a.normal.z) <
           std::tie(b.normal.x, b.normal.y, b.normal.z);
  });
  if (stable.size() > max_poses) stable.resize(max_poses);

  for (auto& f : stable) {
    auto q = rotation_between(f.normal, {0, 0, -1});
    auto lowest = infinity;
    for (auto& p : m.positions) lowest = std::min(lowest, rotate(q, p).z);
    shape.poses.push_back({q, -lowest, f.area});
  }
  return shape;
}

}  // namespace clearsim
