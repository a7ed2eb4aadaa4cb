#include "clearsim/mesh.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "clearsim/error.h"
#include "clearsim/image_io.h"

namespace clearsim {

bbox3 mesh_bounds(const mesh& m) {
  auto b = bbox3{};
  for (auto& p : m.positions) b.expand(p);
  return b;
}

mass_properties compute_mass_properties(const mesh& m) {
  auto volume = 0.0;
  auto moment = vec3{};
  for (auto& t : m.triangles) {
    auto& a = m.positions[t[0]];
    auto& b = m.positions[t[1]];
    auto& c = m.positions[t[2]];
    auto v = dot(a, cross(b, c)) / 6;
    volume += v;
    moment += (a + b + c) * (v / 4);
  }
  auto props = mass_properties{volume, {}};
  if (std::abs(volume) > 0) props.centroid = moment / volume;
  return props;
}

// -----------------------------------------------------------------------------
// OBJ
// -----------------------------------------------------------------------------

std::string format_obj(const mesh& m) {
  auto out = std::string{};
  char line[160];
  for (auto& p : m.positions) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", p.x, p.y, p.z);
    out += line;
  }
  for (auto& n : m.normals) {
    std::snprintf(line, sizeof(line), "vn %.17g %.17g %.17g\n", n.x, n.y, n.z);
    out += line;
  }
  for (auto& t : m.triangles) {
    std::snprintf(line, sizeof(line), "f %u//%u %u//%u %u//%u\n", t[0] + 1, t[0] + 1,
        t[1] + 1, t[1] + 1, t[2] + 1, t[2] + 1);
    out += line;
  }
  return out;
}

namespace {

// Area-weighted vertex normals for meshes without vn records.
void compute_vertex_normals(mesh& m) {
  m.normals.assign(m.positions.size(), vec3{});
  for (auto& t : m.triangles) {
    auto n = cross(m.positions[t[1]] - m.positions[t[0]], m.positions[t[2]] - m.positions[t[0]]);
    for (auto i : t) m.normals[i] += n;
  }
  for (auto& n : m.normals) n = normalize(n);
}

int resolve_index(long index, size_t count, int line_number) {
  auto resolved = index > 0 ? index - 1 : static_cast<long>(count) + index;
  if (index == 0 || resolved < 0 || resolved >= static_cast<long>(count))
    throw parse_error("obj line " + std::to_string(line_number) + ": index out of range");
  return static_cast<int>(resolved);
}

}  // namespace

mesh parse_obj(const std::string& text) {
  auto positions = std::vector<vec3>{};
  auto normals = std::vector<vec3>{};
  struct corner {
    int v, n;
  };
  auto faces = std::vector<std::array<corner, 3>>{};
  auto any_missing_normal = false;

  auto stream = std::istringstream(text);
  auto line = std::string{};
  auto line_number = 0;
  while (std::getline(stream, line)) {
    line_number++;
    auto tokens = std::istringstream(line);
    auto tag = std::string{};
    if (!(tokens >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      auto p = vec3{};
      if (!(tokens >> p.x >> p.y >> p.z))
        throw parse_error("obj line " + std::to_string(line_number) + ": bad vector");
      if (!isfinite(p))
        throw parse_error("obj line " + std::to_string(line_number) + ": non-finite value");
      (tag == "v" ? positions : normals).push_back(p);
    } else if (tag == "f") {
      auto corners = std::vector<corner>{};
      auto token = std::string{};
      while (tokens >> token) {
        auto first = token.find('/');
        auto last = token.rfind('/');
        auto c = corner{-1, -1};
        try {
          c.v = resolve_index(std::stol(token.substr(0, first)), positions.size(), line_number);
          if (first != std::string::npos && last + 1 < token.size())
            c.n = resolve_index(std::stol(token.substr(last + 1)), normals.size(), line_number);
        } catch (const std::logic_error&) {
          throw parse_error("obj line " + std::to_string(line_number) + ": bad face token");
        }
        if (c.n < 0) any_missing_normal = true;
        corners.push_back(c);
      }
      if (corners.size() < 3)
        throw parse_error("obj line " + std::to_string(line_number) + ": face needs 3 corners");
      for (size_t i = 1; i + 1 < corners.size(); i++)
        faces.push_back({corners[0], corners[i], corners[i + 1]});
    }
    // other records (vt, o, g, s, usemtl) are ignored
  }

  auto m = mesh{};
  if (any_missing_normal) {
    m.positions = positions;
    for (auto& f : faces)
      m.triangles.push_back({uint32_t(f[0].v), uint32_t(f[1].v), uint32_t(f[2].v)});
    compute_vertex_normals(m);
    return m;
  }
  auto remap = std::map<std::pair<int, int>, uint32_t>{};
  for (auto& f : faces) {
    auto tri = std::array<uint32_t, 3>{};
    for (int k = 0; k < 3; k++) {
      auto key = std::pair{f[k].v, f[k].n};
      auto it = remap.find(key);
      if (it == remap.end()) {
        it = remap.emplace(key, uint32_t(m.positions.size())).first;
        m.positions.push_back(positions[f[k].v]);
        m.normals.push_back(normalize(normals[f[k].n]));
      }
      tri[k] = it->second;
    }
    m.triangles.push_back(tri);
  }
  return m;
}

mesh load_obj(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return parse_obj(std::string(bytes.begin(), bytes.end()));
}

void save_obj(const mesh& m, const std::filesystem::path& path) {
  write_file_atomic(path, format_obj(m));
}

// -----------------------------------------------------------------------------
// PROCEDURAL SHAPES
// -----------------------------------------------------------------------------

namespace {

uint32_t add_vertex(mesh& m, const vec3& p, const vec3& n) {
  m.positions.push_back(p);
  m.normals.push_back(n);
  return uint32_t(m.positions.size() - 1);
}

void add_quad(mesh& m, uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
  m.triangles.push_back({a, b, c});
  m.triangles.push_back({a, c, d});
}

// Flat-shaded planar polygon, counter-clockwise seen from `normal`.
void add_flat_polygon(mesh& m, const std::vector<vec3>& points, const vec3& normal) {
  auto first = uint32_t(m.positions.size());
  for (auto& p : points) add_vertex(m, p, normal);
  for (uint32_t i = 1; i + 1 < points.size(); i++)
    m.triangles.push_back({first, first + i, first + i + 1});
}

}  // namespace

mesh make_uv_sphere(double radius, int slices, int stacks) {
  auto m = mesh{};
  for (int j = 0; j <= stacks; j++) {
    auto theta = pi * j / stacks;
    for (int i = 0; i <= slices; i++) {
      auto phi = 2 * pi * (i % slices) / slices;
      auto n = vec3{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
      if (j == 0) n = {0, 0, 1};
      if (j == stacks) n = {0, 0, -1};
      add_vertex(m, n * radius, n);
    }
  }
  auto index = [&](int i, int j) { return uint32_t(j * (slices + 1) + i); };
  for (int j = 0; j < stacks; j++) {
    for (int i = 0; i < slices; i++) {
      auto a = index(i, j), b = index(i, j + 1), c = index(i + 1, j + 1), d = index(i + 1, j);
      if (j != 0) m.triangles.push_back({a, b, d});
      if (j != stacks - 1) m.triangles.push_back({b, c, d});
    }
  }
  return m;
}

mesh make_box(const vec3& h) {
  auto m = mesh{};
  auto face = [&](vec3 n, vec3 u, vec3 v) {
    auto c = n * h;
    auto uu = u * h, vv = v * h;
    add_flat_polygon(m, {c - uu - vv, c + uu - vv, c + uu + vv, c - uu + vv}, n);
  };
  face({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  face({-1, 0, 0}, {0, 0, 1}, {0, 1, 0});
  face({0, 1, 0}, {0, 0, 1}, {1, 0, 0});
  face({0, -1, 0}, {1, 0, 0}, {0, 0, 1});
  face({0, 0, 1}, {1, 0, 0}, {0, 1, 0});
  face({0, 0, -1}, {0, 1, 0}, {1, 0, 0});
  return m;
}

mesh make_cylinder(double radius, double height, int segments) {
  return make_lathe({{0, -height / 2}, {radius, -height / 2}, {radius, height / 2},
                        {0, height / 2}},
      segments);
}

mesh make_lathe(const std::vector<vec2>& profile, int segments) {
  // profile points with x == 0 become cap centers; consecutive profile
  // segments get their own ring so that creases stay sharp
  auto m = mesh{};
  auto ring = [&](const vec2& p, const vec2& normal2d) {
    auto first = uint32_t(m.positions.size());
    for (int i = 0; i <= segments; i++) {
      auto phi = 2 * pi * (i % segments) / segments;
      auto c = std::cos(phi), s = std::sin(phi);
      add_vertex(m, {p.x * c, p.x * s, p.y}, normalize(vec3{normal2d.x * c, normal2d.x * s, normal2d.y}));
    }
    return first;
  };
  // per-profile-point smoothed normals inside runs, split at caps
  for (size_t k = 0; k + 1 < profile.size(); k++) {
    auto a = profile[k], b = profile[k + 1];
    auto d = vec2{b.x - a.x, b.y - a.y};
    // outward normal of segment (profile runs bottom to top, outside on +x)
    auto n = vec2{d.y, -d.x};
    auto len = std::hypot(n.x, n.y);
    if (len == 0) continue;
    n = {n.x / len, n.y / len};
    auto smooth = [&](size_t idx, const vec2& own) {
      // average with neighbouring segment normal if the turn is gentle
      auto neighbour = [&](size_t i0, size_t i1) -> std::optional<vec2> {
        if (i1 >= profile.size()) return std::nullopt;
        auto dd = vec2{profile[i1].x - profile[i0].x, profile[i1].y - profile[i0].y};
        auto nn = vec2{dd.y, -dd.x};
        auto l = std::hypot(nn.x, nn.y);
        if (l == 0) return std::nullopt;
        return vec2{nn.x / l, nn.y / l};
      };
      std::optional<vec2> other =
          idx == k ? (k > 0 ? neighbour(k - 1, k) : std::nullopt) : neighbour(k + 1, k + 2);
      if (other && own.x * other->x + own.y * other->y > std::cos(pi / 6))
        return vec2{own.x + other->x, own.y + other->y};
      return own;
    };
    auto na = smooth(k, n), nb = smooth(k + 1, n);
    if (a.x == 0 && b.x == 0) continue;
    auto ra = ring(a, na), rb = ring(b, nb);
    for (int i = 0; i < segments; i++) {
      if (a.x == 0) {
        m.triangles.push_back({ra + i, rb + i + 1, rb + i});
      } else if (b.x == 0) {
        m.triangles.push_back({ra + i, ra + i + 1, rb + i});
      } else {
        add_quad(m, ra + i, ra + i + 1, rb + i + 1, rb + i);
      }
    }
  }
  return m;
}

mesh make_prism(double base, double height, double depth) {
  auto m = mesh{};
  auto a = vec3{-base / 2, 0, -height / 2};
  auto b = vec3{base / 2, 0, -height / 2};
  auto c = vec3{0, 0, height / 2};
  auto y0 = vec3{0, -depth / 2, 0}, y1 = vec3{0, depth / 2, 0};
  add_flat_polygon(m, {a + y0, b + y0, c + y0}, {0, -1, 0});
  add_flat_polygon(m, {a + y1, c + y1, b + y1}, {0, 1, 0});
  auto side = [&](vec3 p, vec3 q) {
    auto n = normalize(cross(q - p, y1 - y0));
    add_flat_polygon(m, {p + y0, p + y1, q + y1, q + y0}, -n);
  };
  side(a, b);
  side(b, c);
  side(c, a);
  // make sure every face winds outward
  for (auto& t : m.triangles) {
    auto n = cross(m.positions[t[1]] - m.positions[t[0]], m.positions[t[2]] - m.positions[t[0]]);
    if (dot(n, m.normals[t[0]]) < 0) std::swap(t[1], t[2]);
  }
  return m;
}

mesh make_ground_plane(double size) {
  auto m = mesh{};
  auto h = size / 2;
  add_flat_polygon(m, {{-h, -h, 0}, {h, -h, 0}, {h, h, 0}, {-h, h, 0}}, {0, 0, 1});
  return m;
}

mesh make_corner_backdrop(double size, double wall_height) {
  auto m = make_ground_plane(size);
  auto h = size / 2;
  add_flat_polygon(
      m, {{-h, h, 0}, {h, h, 0}, {h, h, wall_height}, {-h, h, wall_height}}, {0, -1, 0});
  return m;
}

}  // namespace clearsim
