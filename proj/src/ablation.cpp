#include "clearsim/ablation.h"

#include <cmath>
#include <cstdio>
#include <set>

#include "clearsim/error.h"
#include "clearsim/image_io.h"
#include "json_util.h"

namespace clearsim {

bool ablation_delta::empty() const {
  auto r = render;
  return !rotate_light && !light_color && !light_radius_m && !hdri_id && !hdri_rotation_deg &&
         !backdrop_material && glass_overrides.empty() && camera_overrides.empty() &&
         !r.samples_per_pixel && !r.max_bounces && !r.caustics_enabled && !r.photon_count &&
         !r.photon_gather_radius_m && !r.exposure_ev;
}

namespace {

// Keys that would change scene composition.
const std::set<std::string>& geometry_keys() {
  static const auto keys = std::set<std::string>{"objects", "props", "backdrop", "backdrop_mesh",
      "transform", "translation", "rotation", "scale", "mesh", "class", "semantic_class",
      "object_id", "id", "object_count", "cameras_added", "resolution", "width", "height"};
  return keys;
}

void reject_geometry(const json_reader& r) {
  for (auto& [key, value] : r.node().items()) {
    if (geometry_keys().count(key))
      throw validation_error(r.field(key), "geometry field cannot be changed by an ablation delta");
  }
}

uint32_t parse_index(const std::string& key, const std::string& path) {
  try {
    size_t used = 0;
    auto v = std::stoul(key, &used);
    if (used != key.size() || v > UINT32_MAX) throw std::invalid_argument(key);
    return static_cast<uint32_t>(v);
  } catch (const std::logic_error&) {
    throw validation_error(path, "expected an unsigned integer key, got '" + key + "'");
  }
}

glass_override read_glass_override(const json_reader& r) {
  reject_geometry(r);
  r.allow_only({"roughness", "tint", "specular_scale", "base_ior", "abbe_number", "thickness"});
  auto g = glass_override{};
  if (r.has("roughness")) g.roughness = r.number("roughness");
  if (r.has("tint")) g.tint = r.vector3("tint");
  if (r.has("specular_scale")) g.specular_scale = r.number("specular_scale");
  if (r.has("base_ior")) g.base_ior = r.number("base_ior");
  if (r.has("abbe_number")) g.abbe_number = r.number("abbe_number");
  if (r.has("thickness")) {
    auto t = r.string("thickness");
    if (t == "solid") {
      g.thickness = thickness_mode::solid;
    } else if (t == "thin_walled") {
      g.thickness = thickness_mode::thin_walled;
    } else {
      throw validation_error(r.field("thickness"), "expected solid or thin_walled");
    }
  }
  return g;
}

json to_json(const glass_override& g) {
  auto j = json::object();
  if (g.roughness) j["roughness"] = *g.roughness;
  if (g.tint) j["tint"] = to_json(*g.tint);
  if (g.specular_scale) j["specular_scale"] = *g.specular_scale;
  if (g.base_ior) j["base_ior"] = *g.base_ior;
  if (g.abbe_number) j["abbe_number"] = *g.abbe_number;
  if (g.thickness) j["thickness"] = *g.thickness == thickness_mode::solid ? "solid" : "thin_walled";
  return j;
}

}  // namespace

ablation_delta parse_delta(const std::string& text) {
  auto root = parse_json_text(text, "delta");
  if (!root.is_object()) throw parse_error("delta: expected an object");
  auto r = json_reader(root, "");
  reject_geometry(r);
  r.allow_only({"tag", "light_rotation", "light_color", "light_radius_m", "hdri_id",
      "hdri_rotation_deg", "backdrop_material", "glass_overrides", "camera_overrides",
      "render_overrides"});
  auto d = ablation_delta{};
  d.tag = r.string("tag", "");
  if (r.has("light_rotation")) {
    auto lr = r.child("light_rotation");
    lr.allow_only({"angle_deg", "axis", "pivot", "light"});
    auto rot = light_rotation{};
    rot.angle_deg = lr.number("angle_deg");
    rot.axis = lr.vector3("axis", rot.axis);
    if (lr.has("pivot")) rot.pivot = lr.vector3("pivot");
    rot.light_index = static_cast<uint32_t>(lr.uint("light", 0));
    if (!(length(rot.axis) > 0)) throw validation_error(lr.field("axis"), "must be non-zero");
    d.rotate_light = rot;
  }
  if (r.has("light_color")) d.light_color = r.vector3("light_color");
  if (r.has("light_radius_m")) d.light_radius_m = r.number("light_radius_m");
  if (r.has("hdri_id")) d.hdri_id = r.string("hdri_id");
  if (r.has("hdri_rotation_deg")) d.hdri_rotation_deg = r.number("hdri_rotation_deg");
  if (r.has("backdrop_material")) {
    auto b = r.child("backdrop_material");
    reject_geometry(b);
    d.backdrop_material = read_diffuse(b);
  }
  if (r.has("glass_overrides")) {
    auto g = r.child("glass_overrides");
    if (!g.node().is_object()) throw validation_error(g.path(), "expected an object keyed by object id");
    for (auto& [key, value] : g.node().items())
      d.glass_overrides[parse_index(key, g.field(key))] = read_glass_override(g.child(key.c_str()));
  }
  if (r.has("camera_overrides")) {
    auto c = r.child("camera_overrides");
    if (!c.node().is_object()) throw validation_error(c.path(), "expected an object keyed by camera index");
    for (auto& [key, value] : c.node().items()) {
      auto entry = c.child(key.c_str());
      entry.allow_only({"exposure_ev", "pose"});
      auto o = camera_override{};
      if (entry.has("exposure_ev")) o.exposure_ev = entry.number("exposure_ev");
      if (entry.has("pose")) o.pose = read_transform(entry.child("pose"));
      d.camera_overrides[parse_index(key, c.field(key))] = o;
    }
  }
  if (r.has("render_overrides")) {
    auto ro = r.child("render_overrides");
    ro.allow_only({"samples_per_pixel", "max_bounces", "caustics_enabled", "photon_count",
        "photon_gather_radius_m", "exposure_ev"});
    if (ro.has("samples_per_pixel")) d.render.samples_per_pixel = uint32_t(ro.uint("samples_per_pixel"));
    if (ro.has("max_bounces")) d.render.max_bounces = uint32_t(ro.uint("max_bounces"));
    if (ro.has("caustics_enabled")) d.render.caustics_enabled = ro.boolean("caustics_enabled", true);
    if (ro.has("photon_count")) d.render.photon_count = uint32_t(ro.uint("photon_count"));
    if (ro.has("photon_gather_radius_m"))
      d.render.photon_gather_radius_m = ro.number("photon_gather_radius_m");
    if (ro.has("exposure_ev")) d.render.exposure_ev = ro.number("exposure_ev");
  }
  return d;
}

ablation_delta load_delta(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return parse_delta(std::string(bytes.begin(), bytes.end()));
}

std::string serialize_delta(const ablation_delta& d) {
  auto j = json::object();
  if (!d.tag.empty()) j["tag"] = d.tag;
  if (d.rotate_light) {
    auto& r = *d.rotate_light;
    j["light_rotation"] = {{"angle_deg", r.angle_deg}, {"axis", to_json(r.axis)}, {"light", r.light_index}};
    if (r.pivot) j["light_rotation"]["pivot"] = to_json(*r.pivot);
  }
  if (d.light_color) j["light_color"] = to_json(*d.light_color);
  if (d.light_radius_m) j["light_radius_m"] = *d.light_radius_m;
  if (d.hdri_id) j["hdri_id"] = *d.hdri_id;
  if (d.hdri_rotation_deg) j["hdri_rotation_deg"] = *d.hdri_rotation_deg;
  if (d.backdrop_material) j["backdrop_material"] = to_json(*d.backdrop_material);
  for (auto& [id, g] : d.glass_overrides) j["glass_overrides"][std::to_string(id)] = to_json(g);
  for (auto& [index, c] : d.camera_overrides) {
    auto e = json::object();
    if (c.exposure_ev) e["exposure_ev"] = *c.exposure_ev;
    if (c.pose) e["pose"] = to_json(*c.pose);
    j["camera_overrides"][std::to_string(index)] = e;
  }
  auto ro = json::object();
  if (d.render.samples_per_pixel) ro["samples_per_pixel"] = *d.render.samples_per_pixel;
  if (d.render.max_bounces) ro["max_bounces"] = *d.render.max_bounces;
  if (d.render.caustics_enabled) ro["caustics_enabled"] = *d.render.caustics_enabled;
  if (d.render.photon_count) ro["photon_count"] = *d.render.photon_count;
  if (d.render.photon_gather_radius_m) ro["photon_gather_radius_m"] = *d.render.photon_gather_radius_m;
  if (d.render.exposure_ev) ro["exposure_ev"] = *d.render.exposure_ev;
  if (!ro.empty()) j["render_overrides"] = ro;
  return dump_canonical(j);
}

scene apply_delta(const scene& input, const ablation_delta& delta) {
  auto s = input;
  if (delta.rotate_light) {
    auto& r = *delta.rotate_light;
    if (r.light_index >= s.lights.size())
      throw validation_error("light_rotation.light", "no light with index " + std::to_string(r.light_index));
  }
  if (delta.rotate_light && delta.rotate_light->angle_deg != 0) {
    auto& r = *delta.rotate_light;
    auto pivot = r.pivot.value_or(s.backdrop.transform.translation);
    auto q = axis_angle(r.axis, r.angle_deg * pi / 180);
    auto& light = s.lights[r.light_index];
    light.center = pivot + rotate(q, light.center - pivot);
    light.direction = normalize(rotate(q, light.direction));
  }
  for (auto& light : s.lights) {
    if (delta.light_color) light.intensity = *delta.light_color;
    if (delta.light_radius_m) light.radius_m = *delta.light_radius_m;
  }
  if (delta.hdri_id) s.environment.id = *delta.hdri_id;
  if (delta.hdri_rotation_deg) s.environment.rotation_deg = *delta.hdri_rotation_deg;
  if (delta.backdrop_material) s.backdrop.material = *delta.backdrop_material;
  for (auto& [id, o] : delta.glass_overrides) {
    auto path = "glass_overrides." + std::to_string(id);
    object_instance* target = nullptr;
    for (auto& obj : s.objects)
      if (obj.object_id == id) target = &obj;
    for (auto& obj : s.props)
      if (obj.object_id == id) target = &obj;
    if (!target) throw validation_error(path, "unknown object id " + std::to_string(id));
    auto* g = std::get_if<glass_material>(&target->material);
    if (!g) throw validation_error(path, "object " + std::to_string(id) + " is not glass");
    if (o.roughness) g->roughness = *o.roughness;
    if (o.tint) g->tint = *o.tint;
    if (o.specular_scale) g->specular_scale = *o.specular_scale;
    if (o.base_ior) g->base_ior = *o.base_ior;
    if (o.abbe_number) g->abbe_number = *o.abbe_number > 0 ? std::optional(*o.abbe_number) : std::nullopt;
    if (o.thickness) g->thickness = *o.thickness;
  }
  for (auto& [index, o] : delta.camera_overrides) {
    if (index >= s.cameras.size())
      throw validation_error("camera_overrides." + std::to_string(index), "no camera with that index");
    if (o.exposure_ev) s.cameras[index].exposure_ev = *o.exposure_ev;
    if (o.pose) s.cameras[index].pose = *o.pose;
  }
  validate_scene(s);
  return s;
}

render_settings apply_render_override(const render_settings& settings, const ablation_delta& delta) {
  auto s = settings;
  auto& r = delta.render;
  if (r.samples_per_pixel) s.samples_per_pixel = *r.samples_per_pixel;
  if (r.max_bounces) s.max_bounces = *r.max_bounces;
  if (r.caustics_enabled) s.caustics_enabled = *r.caustics_enabled;
  if (r.photon_count) s.photon_count = *r.photon_count;
  if (r.photon_gather_radius_m) s.photon_gather_radius_m = *r.photon_gather_radius_m;
  if (r.exposure_ev) s.exposure_ev = *r.exposure_ev;
  validate_settings(s);
  return s;
}

std::vector<sweep_entry> sweep(
    const scene& base, const std::vector<ablation_delta>& deltas, const render_settings& settings) {
  auto tags = std::set<std::string>{};
  for (size_t i = 0; i < deltas.size(); i++) {
    if (!tags.insert(deltas[i].tag).second)
      throw validation_error("deltas[" + std::to_string(i) + "].tag", "duplicate tag '" + deltas[i].tag + "'");
  }
  auto out = std::vector<sweep_entry>{};
  for (auto& d : deltas) out.push_back({apply_delta(base, d), apply_render_override(settings, d), d.tag});
  return out;
}

std::string light_angle_tag(double angle_deg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", std::abs(angle_deg));
  auto text = std::string(buf);
  while (!text.empty() && text.back() == '0') text.pop_back();
  if (!text.empty() && text.back() == '.') text.pop_back();
  for (auto& c : text)
    if (c == '.') c = 'p';
  return std::string("light_") + (angle_deg < 0 && text != "0" ? "m" : "") + text;
}

ablation_delta light_angle_delta(double angle_deg) {
  auto d = ablation_delta{};
  d.tag = light_angle_tag(angle_deg);
  d.rotate_light = light_rotation{};
  d.rotate_light->angle_deg = angle_deg;
  return d;
}

}  // namespace clearsim
