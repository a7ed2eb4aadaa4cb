#include "clearsim/scene.h"

#include <algorithm>
#include <map>
#include <set>

#include "clearsim/catalog.h"
#include "clearsim/image_io.h"
#include "json_util.h"

namespace clearsim {

// -----------------------------------------------------------------------------
// JSON HELPERS
// -----------------------------------------------------------------------------

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(what + ": " + e.what());
  }
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json_reader::json_reader(const json& node, std::string path)
    : node_(node), path_(std::move(path)) {
  if (!node_.is_object()) throw parse_error((path_.empty() ? "document" : path_) + ": expected an object");
}

void json_reader::allow_only(std::initializer_list<const char*> known) const {
  for (auto& [key, value] : node_.items()) {
    auto found = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!found) throw validation_error(field(key), "unknown field");
  }
}

const json& json_reader::get(const char* key) const {
  auto it = node_.find(key);
  if (it == node_.end()) throw parse_error(field(key) + ": missing required field");
  return *it;
}

json_reader json_reader::child(const char* key) const { return json_reader(get(key), field(key)); }

std::vector<json_reader> json_reader::array(const char* key) const {
  auto& a = get(key);
  if (!a.is_array()) throw parse_error(field(key) + ": expected an array");
  auto out = std::vector<json_reader>{};
  for (size_t i = 0; i < a.size(); i++)
    out.emplace_back(a[i], field(key) + "[" + std::to_string(i) + "]");
  return out;
}

double json_reader::number(const char* key) const {
  auto& v = get(key);
  if (!v.is_number()) throw parse_error(field(key) + ": expected a number");
  return v.get<double>();
}
double json_reader::number(const char* key, double fallback) const {
  return has(key) ? number(key) : fallback;
}
uint64_t json_reader::uint(const char* key) const {
  auto& v = get(key);
  if (!v.is_number_unsigned()) throw parse_error(field(key) + ": expected an unsigned integer");
  return v.get<uint64_t>();
}
uint64_t json_reader::uint(const char* key, uint64_t fallback) const {
  return has(key) ? uint(key) : fallback;
}
int json_reader::integer(const char* key) const {
  auto& v = get(key);
  if (!v.is_number_integer()) throw parse_error(field(key) + ": expected an integer");
  auto value = v.get<int64_t>();
  if (value < INT32_MIN || value > INT32_MAX) throw parse_error(field(key) + ": out of range");
  return static_cast<int>(value);
}
int json_reader::integer(const char* key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}
bool json_reader::boolean(const char* key, bool fallback) const {
  if (!has(key)) return fallback;
  auto& v = get(key);
  if (!v.is_boolean()) throw parse_error(field(key) + ": expected a boolean");
  return v.get<bool>();
}
std::string json_reader::string(const char* key) const {
  auto& v = get(key);
  if (!v.is_string()) throw parse_error(field(key) + ": expected a string");
  return v.get<std::string>();
}
std::string json_reader::string(const char* key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}
vec3 json_reader::vector3(const char* key) const {
  auto& v = get(key);
  if (!v.is_array() || v.size() != 3 ||
      !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))
    throw parse_error(field(key) + ": expected 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}
vec3 json_reader::vector3(const char* key, const vec3& fallback) const {
  return has(key) ? vector3(key) : fallback;
}
std::vector<double> json_reader::numbers(const char* key) const {
  auto& v = get(key);
  if (!v.is_array()) throw parse_error(field(key) + ": expected an array of numbers");
  auto out = std::vector<double>{};
  for (auto& e : v) {
    if (!e.is_number()) throw parse_error(field(key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}
std::vector<std::string> json_reader::strings(const char* key) const {
  auto& v = get(key);
  if (!v.is_array()) throw parse_error(field(key) + ": expected an array of strings");
  auto out = std::vector<std::string>{};
  for (auto& e : v) {
    if (!e.is_string()) throw parse_error(field(key) + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

json to_json(const vec3& v) { return json::array({v.x, v.y, v.z}); }
json to_json(const quat& q) { return json::array({q.w, q.x, q.y, q.z}); }
json to_json(const rigid_transform& t) {
  return {{"translation", to_json(t.translation)}, {"rotation", to_json(t.rotation)},
      {"scale", t.scale}};
}

rigid_transform read_transform(const json_reader& r) {
  r.allow_only({"translation", "rotation", "scale"});
  auto t = rigid_transform{};
  t.translation = r.vector3("translation");
  auto q = r.numbers("rotation");
  if (q.size() != 4) throw parse_error(r.field("rotation") + ": expected 4 numbers (w,x,y,z)");
  t.rotation = {q[0], q[1], q[2], q[3]};
  t.scale = r.number("scale", 1.0);
  return t;
}

json to_json(const glass_material& g) {
  auto j = json{{"type", "glass"}, {"base_ior", g.base_ior}, {"roughness", g.roughness},
      {"tint", to_json(g.tint)}, {"specular_scale", g.specular_scale},
      {"thickness", g.thickness == thickness_mode::solid ? "solid" : "thin_walled"}};
  if (g.abbe_number) j["abbe_number"] = *g.abbe_number;
  return j;
}

json to_json(const diffuse_material& d) {
  auto j = json{{"type", "diffuse"}, {"albedo", to_json(d.albedo)}};
  if (!d.texture.empty()) {
    j["texture"] = d.texture;
    j["texture_scale_m"] = d.texture_scale_m;
  }
  return j;
}

json to_json(const material_ref& m) {
  return std::visit([](const auto& v) { return to_json(v); }, m);
}

glass_material read_glass(const json_reader& r) {
  r.allow_only({"type", "base_ior", "abbe_number", "roughness", "tint", "specular_scale",
      "thickness"});
  auto g = glass_material{};
  g.base_ior = r.number("base_ior", g.base_ior);
  g.abbe_number = r.has("abbe_number") ? std::optional(r.number("abbe_number")) : std::nullopt;
  g.roughness = r.number("roughness", g.roughness);
  g.tint = r.vector3("tint", g.tint);
  g.specular_scale = r.number("specular_scale", g.specular_scale);
  auto thickness = r.string("thickness", "solid");
  if (thickness == "solid") {
    g.thickness = thickness_mode::solid;
  } else if (thickness == "thin_walled") {
    g.thickness = thickness_mode::thin_walled;
  } else {
    throw validation_error(r.field("thickness"), "expected solid or thin_walled");
  }
  return g;
}

diffuse_material read_diffuse(const json_reader& r) {
  r.allow_only({"type", "albedo", "texture", "texture_scale_m"});
  auto d = diffuse_material{};
  d.albedo = r.vector3("albedo", d.albedo);
  d.texture = r.string("texture", "");
  d.texture_scale_m = r.number("texture_scale_m", d.texture_scale_m);
  return d;
}

material_ref read_material(const json_reader& r) {
  auto type = r.string("type");
  if (type == "glass") return read_glass(r);
  if (type == "diffuse") return read_diffuse(r);
  throw validation_error(r.field("type"), "unknown material type '" + type + "'");
}

json to_json(const area_light& l) {
  return {{"pose", {{"center", to_json(l.center)}, {"direction", to_json(l.direction)}}},
      {"radius_m", l.radius_m}, {"cone_half_angle", l.cone_half_angle},
      {"intensity", to_json(l.intensity)}, {"enabled", l.enabled}};
}

area_light read_light(const json_reader& r) {
  r.allow_only({"pose", "radius_m", "cone_half_angle", "intensity", "enabled"});
  auto l = area_light{};
  auto pose = r.child("pose");
  pose.allow_only({"center", "direction"});
  l.center = pose.vector3("center");
  l.direction = pose.vector3("direction");
  l.radius_m = r.number("radius_m", 0.0);
  l.cone_half_angle = r.number("cone_half_angle", l.cone_half_angle);
  l.intensity = r.vector3("intensity");
  l.enabled = r.boolean("enabled", true);
  return l;
}

json to_json(const camera& c) {
  return {{"pose", to_json(c.pose)}, {"width", c.width}, {"height", c.height},
      {"vertical_fov", c.vertical_fov}, {"exposure_ev", c.exposure_ev}};
}

camera read_camera(const json_reader& r) {
  r.allow_only({"pose", "width", "height", "vertical_fov", "exposure_ev"});
  auto c = camera{};
  c.pose = read_transform(r.child("pose"));
  c.width = r.integer("width", c.width);
  c.height = r.integer("height", c.height);
  c.vertical_fov = r.number("vertical_fov");
  c.exposure_ev = r.number("exposure_ev", 0.0);
  return c;
}

// -----------------------------------------------------------------------------
// DISPERSION
// -----------------------------------------------------------------------------

band_iors dispersion_band_iors(double base_ior, double abbe_number) {
  if (!(base_ior > 1) || !std::isfinite(base_ior))
    throw domain_error("base_ior must be a finite value > 1");
  if (!(abbe_number > 0)) throw domain_error("abbe_number must be > 0");
  auto spread = std::isinf(abbe_number) ? 0.0 : (base_ior - 1) / abbe_number;
  return {base_ior - spread / 2, base_ior, base_ior + spread / 2};
}

band_iors dispersion_band_iors(const glass_material& glass) {
  return dispersion_band_iors(glass.base_ior, glass.abbe_number.value_or(infinity));
}

// -----------------------------------------------------------------------------
// CAMERAS
// -----------------------------------------------------------------------------

camera make_look_at_camera(const vec3& eye, const vec3& target, int width, int height,
    double vertical_fov, const vec3& up) {
  auto c = camera{};
  c.pose.translation = eye;
  c.pose.rotation = look_rotation(target - eye, up);
  c.width = width;
  c.height = height;
  c.vertical_fov = vertical_fov;
  return c;
}

// -----------------------------------------------------------------------------
// VALIDATION
// -----------------------------------------------------------------------------

namespace {

void require(bool condition, const std::string& field, const std::string& what) {
  if (!condition) throw validation_error(field, what);
}

bool in_unit_range(double v) { return v >= 0 && v <= 1; }
bool in_unit_range(const vec3& v) {
  return in_unit_range(v.x) && in_unit_range(v.y) && in_unit_range(v.z);
}

void validate_transform(const rigid_transform& t, const std::string& field) {
  require(isfinite(t.translation), field + ".translation", "non-finite value");
  auto& q = t.rotation;
  require(std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z),
      field + ".rotation", "non-finite value");
  require(std::abs(norm(q) - 1) <= 1e-6, field + ".rotation", "quaternion is not unit-norm");
  require(std::isfinite(t.scale) && t.scale > 0, field + ".scale", "must be > 0");
}

void validate_material(const material_ref& m, const std::string& field, const asset_catalog* catalog) {
  if (auto* g = std::get_if<glass_material>(&m)) {
    require(std::isfinite(g->base_ior) && g->base_ior > 1, field + ".base_ior", "must be > 1");
    if (g->abbe_number)
      require(*g->abbe_number > 0, field + ".abbe_number", "must be > 0");
    require(in_unit_range(g->roughness), field + ".roughness", "must be in [0,1]");
    require(in_unit_range(g->tint), field + ".tint", "components must be in [0,1]");
    require(in_unit_range(g->specular_scale), field + ".specular_scale", "must be in [0,1]");
  } else {
    auto& d = std::get<diffuse_material>(m);
    require(in_unit_range(d.albedo), field + ".albedo", "components must be in [0,1]");
    if (!d.texture.empty()) {
      require(std::isfinite(d.texture_scale_m) && d.texture_scale_m > 0,
          field + ".texture_scale_m", "must be > 0");
      if (catalog && !catalog->has_texture(d.texture))
        throw asset_error(field + ".texture: unknown texture '" + d.texture + "'");
    }
  }
}

void validate_instance(const object_instance& o, const std::string& field, semantic_class expected,
    std::set<uint32_t>& ids, const asset_catalog* catalog) {
  require(o.object_id >= 1, field + ".id", "object_id must be >= 1");
  require(ids.insert(o.object_id).second, field + ".id",
      "duplicate object_id " + std::to_string(o.object_id));
  require(!o.mesh.empty(), field + ".mesh", "empty mesh reference");
  if (catalog && !catalog->has_mesh(o.mesh))
    throw asset_error(field + ".mesh: unknown mesh '" + o.mesh + "'");
  validate_transform(o.transform, field + ".transform");
  validate_material(o.material, field + ".material", catalog);
  require(o.semantic == expected, field + ".class", "semantic class does not match list");
}

}  // namespace

const object_instance* find_instance(const scene& s, uint32_t object_id) {
  const object_instance* found = nullptr;
  for_each_instance(s, [&](const object_instance& o) {
    if (o.object_id == object_id) found = &o;
  });
  return found;
}

void validate_scene(const scene& s, const asset_catalog* catalog) {
  require(std::isfinite(s.depth_range_m) && s.depth_range_m > 0, "depth_range_m", "must be > 0");
  auto ids = std::set<uint32_t>{};
  for (size_t i = 0; i < s.objects.size(); i++)
    validate_instance(s.objects[i], "objects[" + std::to_string(i) + "]",
        semantic_class::transparent, ids, catalog);
  for (size_t i = 0; i < s.props.size(); i++)
    validate_instance(
        s.props[i], "props[" + std::to_string(i) + "]", semantic_class::prop, ids, catalog);
  validate_instance(s.backdrop, "backdrop", semantic_class::backdrop, ids, catalog);
  for (size_t i = 0; i < s.lights.size(); i++) {
    auto& l = s.lights[i];
    auto field = "lights[" + std::to_string(i) + "]";
    require(isfinite(l.center), field + ".pose.center", "non-finite value");
    require(isfinite(l.direction) && std::abs(length(l.direction) - 1) <= 1e-6,
        field + ".pose.direction", "must be a unit vector");
    require(std::isfinite(l.radius_m) && l.radius_m >= 0, field + ".radius_m", "must be >= 0");
    require(l.cone_half_angle > 0 && l.cone_half_angle <= pi / 2, field + ".cone_half_angle",
        "must be in (0, pi/2]");
    require(isfinite(l.intensity) && l.intensity.x >= 0 && l.intensity.y >= 0 &&
                l.intensity.z >= 0,
        field + ".intensity", "components must be finite and >= 0");
  }
  require(!s.environment.id.empty(), "environment.id", "empty environment reference");
  require(std::isfinite(s.environment.rotation_deg), "environment.rotation_deg", "non-finite value");
  if (catalog && !catalog->has_environment(s.environment.id))
    throw asset_error("environment.id: unknown environment '" + s.environment.id + "'");
  for (size_t i = 0; i < s.cameras.size(); i++) {
    auto& c = s.cameras[i];
    auto field = "cameras[" + std::to_string(i) + "]";
    validate_transform(c.pose, field + ".pose");
    require(c.pose.scale == 1, field + ".pose.scale", "camera pose must not scale");
    require(c.width >= 1 && c.height >= 1, field + ".width", "resolution must be >= 1x1");
    require(c.vertical_fov > 0 && c.vertical_fov < pi, field + ".vertical_fov",
        "must be in (0, pi)");
    require(std::isfinite(c.exposure_ev), field + ".exposure_ev", "non-finite value");
  }
}

scene canonicalize(scene s) {
  auto by_id = [](const object_instance& a, const object_instance& b) {
    return a.object_id < b.object_id;
  };
  std::stable_sort(s.objects.begin(), s.objects.end(), by_id);
  std::stable_sort(s.props.begin(), s.props.end(), by_id);
  return s;
}

// -----------------------------------------------------------------------------
// SERIALIZATION
// -----------------------------------------------------------------------------

namespace {

constexpr auto scene_format = "clearsim-scene/1";

const char* class_name(semantic_class c) {
  switch (c) {
    case semantic_class::transparent: return "transparent";
    case semantic_class::prop: return "prop";
    case semantic_class::backdrop: return "backdrop";
    default: return "none";
  }
}

json to_json(const object_instance& o) {
  return {{"id", o.object_id}, {"mesh", o.mesh}, {"transform", clearsim::to_json(o.transform)},
      {"material", clearsim::to_json(o.material)}, {"class", class_name(o.semantic)}};
}

object_instance read_instance(const json_reader& r) {
  r.allow_only({"id", "mesh", "transform", "material", "class"});
  auto o = object_instance{};
  auto id = r.uint("id");
  if (id > UINT32_MAX) throw validation_error(r.field("id"), "object_id out of range");
  o.object_id = static_cast<uint32_t>(id);
  o.mesh = r.string("mesh");
  o.transform = read_transform(r.child("transform"));
  o.material = read_material(r.child("material"));
  auto cls = r.string("class");
  if (cls == "transparent") {
    o.semantic = semantic_class::transparent;
  } else if (cls == "prop") {
    o.semantic = semantic_class::prop;
  } else if (cls == "backdrop") {
    o.semantic = semantic_class::backdrop;
  } else {
    throw validation_error(r.field("class"), "unknown semantic class '" + cls + "'");
  }
  return o;
}

}  // namespace

std::string serialize_scene(const scene& input) {
  auto s = canonicalize(input);
  auto objects = json::array(), props = json::array(), lights = json::array(),
       cameras = json::array();
  for (auto& o : s.objects) objects.push_back(to_json(o));
  for (auto& o : s.props) props.push_back(to_json(o));
  for (auto& l : s.lights) lights.push_back(clearsim::to_json(l));
  for (auto& c : s.cameras) cameras.push_back(clearsim::to_json(c));
  auto j = json{{"format", scene_format}, {"seed", s.seed}, {"depth_range_m", s.depth_range_m},
      {"environment", {{"id", s.environment.id}, {"rotation_deg", s.environment.rotation_deg}}},
      {"backdrop", to_json(s.backdrop)}, {"objects", objects}, {"props", props},
      {"lights", lights}, {"cameras", cameras}};
  return dump_canonical(j);
}

scene parse_scene(const std::string& text, const asset_catalog* catalog) {
  auto j = parse_json_text(text, "scene");
  auto r = json_reader(j, "");
  r.allow_only({"format", "seed", "depth_range_m", "environment", "backdrop", "objects", "props",
      "lights", "cameras"});
  if (r.string("format", scene_format) != scene_format)
    throw parse_error("format: unsupported scene format '" + r.string("format") + "'");
  auto s = scene{};
  s.seed = r.uint("seed", 0);
  s.depth_range_m = r.number("depth_range_m", 10.0);
  auto env = r.child("environment");
  env.allow_only({"id", "rotation_deg"});
  s.environment.id = env.string("id");
  s.environment.rotation_deg = env.number("rotation_deg", 0.0);
  s.backdrop = read_instance(r.child("backdrop"));
  if (r.has("objects"))
    for (auto& o : r.array("objects")) s.objects.push_back(read_instance(o));
  if (r.has("props"))
    for (auto& o : r.array("props")) s.props.push_back(read_instance(o));
  for (auto& l : r.array("lights")) s.lights.push_back(read_light(l));
  for (auto& c : r.array("cameras")) s.cameras.push_back(read_camera(c));
  s = canonicalize(std::move(s));
  validate_scene(s, catalog);
  return s;
}

scene load_scene(const std::filesystem::path& path, const asset_catalog* catalog) {
  auto bytes = read_file(path);
  return parse_scene(std::string(bytes.begin(), bytes.end()), catalog);
}

void save_scene(const scene& s, const std::filesystem::path& path) {
  validate_scene(s);
  write_file_atomic(path, serialize_scene(s));
}

// -----------------------------------------------------------------------------
// STRUCTURAL DIFF
// -----------------------------------------------------------------------------

namespace {

void diff_instance(const object_instance& a, const object_instance& b, const std::string& path,
    std::vector<std::string>& out) {
  if (a.mesh != b.mesh) out.push_back(path + ".mesh");
  if (!(a.transform == b.transform)) out.push_back(path + ".transform");
  if (!(a.material == b.material)) out.push_back(path + ".material");
  if (a.semantic != b.semantic) out.push_back(path + ".class");
}

void diff_instances(const std::vector<object_instance>& a, const std::vector<object_instance>& b,
    const std::string& name, std::vector<std::string>& out) {
  auto index = [](const std::vector<object_instance>& v) {
    auto m = std::map<uint32_t, const object_instance*>{};
    for (auto& o : v) m[o.object_id] = &o;
    return m;
  };
  auto ia = index(a), ib = index(b);
  auto ids = std::set<uint32_t>{};
  for (auto& [id, _] : ia) ids.insert(id);
  for (auto& [id, _] : ib) ids.insert(id);
  for (auto id : ids) {
    auto path = name + "[id=" + std::to_string(id) + "]";
    auto pa = ia.find(id), pb = ib.find(id);
    if (pa == ia.end() || pb == ib.end()) {
      out.push_back(path);
    } else {
      diff_instance(*pa->second, *pb->second, path, out);
    }
  }
}

}  // namespace

std::vector<std::string> structural_diff(const scene& a, const scene& b) {
  auto out = std::vector<std::string>{};
  if (a.seed != b.seed) out.push_back("seed");
  if (a.depth_range_m != b.depth_range_m) out.push_back("depth_range_m");
  if (a.environment.id != b.environment.id) out.push_back("environment.id");
  if (a.environment.rotation_deg != b.environment.rotation_deg)
    out.push_back("environment.rotation_deg");
  diff_instances(a.objects, b.objects, "objects", out);
  diff_instances(a.props, b.props, "props", out);
  diff_instance(a.backdrop, b.backdrop, "backdrop", out);
  if (a.lights.size() != b.lights.size()) out.push_back("lights");
  for (size_t i = 0; i < std::min(a.lights.size(), b.lights.size()); i++) {
    auto& la = a.lights[i];
    auto& lb = b.lights[i];
    auto path = "lights[" + std::to_string(i) + "]";
    if (la.center != lb.center || la.direction != lb.direction) out.push_back(path + ".pose");
    if (la.radius_m != lb.radius_m) out.push_back(path + ".radius_m");
    if (la.cone_half_angle != lb.cone_half_angle) out.push_back(path + ".cone_half_angle");
    if (la.intensity != lb.intensity) out.push_back(path + ".intensity");
    if (la.enabled != lb.enabled) out.push_back(path + ".enabled");
  }
  if (a.cameras.size() != b.cameras.size()) out.push_back("cameras");
  for (size_t i = 0; i < std::min(a.cameras.size(), b.cameras.size()); i++) {
    auto& ca = a.cameras[i];
    auto& cb = b.cameras[i];
    auto path = "cameras[" + std::to_string(i) + "]";
    if (!(ca.pose == cb.pose)) out.push_back(path + ".pose");
    if (ca.width != cb.width || ca.height != cb.height) out.push_back(path + ".resolution");
    if (ca.vertical_fov != cb.vertical_fov) out.push_back(path + ".vertical_fov");
    if (ca.exposure_ev != cb.exposure_ev) out.push_back(path + ".exposure_ev");
  }
  return out;
}

}  // namespace clearsim
