#include "clearsim/config.h"

#include "clearsim/error.h"
#include "clearsim/image_io.h"
#include "json_util.h"

namespace clearsim {

const std::set<std::string>& known_passes() {
  static const auto passes = std::set<std::string>{"depth", "normals_world", "normals_camera", "mask",
      "outline", "boundary", "caustics"};
  return passes;
}

std::set<std::string> all_passes() { return known_passes(); }

// -----------------------------------------------------------------------------
// RENDER SETTINGS
// -----------------------------------------------------------------------------

json settings_to_json(const render_settings& s) {
  return {{"samples_per_pixel", s.samples_per_pixel}, {"max_bounces", s.max_bounces},
      {"caustics_enabled", s.caustics_enabled}, {"photon_count", s.photon_count},
      {"photon_gather_radius_m", s.photon_gather_radius_m}, {"frame_seed", s.frame_seed},
      {"tonemap", s.tonemap == tonemap_mode::gamma_srgb ? "gamma_srgb" : "linear_clamp"},
      {"exposure_ev", s.exposure_ev}};
}

render_settings read_settings(const json_reader& r, const render_settings& defaults) {
  r.allow_only({"samples_per_pixel", "max_bounces", "caustics_enabled", "photon_count",
      "photon_gather_radius_m", "frame_seed", "tonemap", "exposure_ev"});
  auto s = defaults;
  s.samples_per_pixel = static_cast<uint32_t>(r.uint("samples_per_pixel", s.samples_per_pixel));
  s.max_bounces = static_cast<uint32_t>(r.uint("max_bounces", s.max_bounces));
  s.caustics_enabled = r.boolean("caustics_enabled", s.caustics_enabled);
  s.photon_count = static_cast<uint32_t>(r.uint("photon_count", s.photon_count));
  s.photon_gather_radius_m = r.number("photon_gather_radius_m", s.photon_gather_radius_m);
  s.frame_seed = r.uint("frame_seed", s.frame_seed);
  auto tonemap = r.string("tonemap", s.tonemap == tonemap_mode::gamma_srgb ? "gamma_srgb" : "linear_clamp");
  if (tonemap == "gamma_srgb") {
    s.tonemap = tonemap_mode::gamma_srgb;
  } else if (tonemap == "linear_clamp") {
    s.tonemap = tonemap_mode::linear_clamp;
  } else {
    throw validation_error(r.field("tonemap"), "expected gamma_srgb or linear_clamp");
  }
  s.exposure_ev = r.number("exposure_ev", s.exposure_ev);
  validate_settings(s);
  return s;
}

std::string serialize_settings(const render_settings& settings) {
  return dump_canonical(settings_to_json(settings));
}

render_settings parse_settings(const std::string& text) {
  auto root = parse_json_text(text, "settings");
  return read_settings(json_reader(root, ""), render_settings{});
}

// -----------------------------------------------------------------------------
// GENERATION
// -----------------------------------------------------------------------------

namespace {

json to_json(const catalog_item& item) {
  return {{"mesh", item.mesh}, {"weight", item.weight}, {"scale", item.scale},
      {"material", clearsim::to_json(item.material)}};
}

std::vector<catalog_item> read_items(const json_reader& r, const char* key) {
  auto items = std::vector<catalog_item>{};
  for (auto& e : r.array(key)) {
    e.allow_only({"mesh", "weight", "scale", "material"});
    auto item = catalog_item{};
    item.mesh = e.string("mesh");
    item.weight = e.number("weight", 1.0);
    item.scale = e.number("scale", 1.0);
    if (e.has("material")) item.material = read_material(e.child("material"));
    items.push_back(item);
  }
  return items;
}

count_range read_range(const json_reader& r, const char* key, count_range fallback) {
  if (!r.has(key)) return fallback;
  auto v = r.numbers(key);
  if (v.size() != 2 || v[0] < 0 || v[1] < 0 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
    throw validation_error(r.field(key), "expected [min, max] unsigned integers");
  return {static_cast<uint32_t>(v[0]), static_cast<uint32_t>(v[1])};
}

json generation_to_json(const generation_config& g) {
  auto items = [](const std::vector<catalog_item>& v) {
    auto a = json::array();
    for (auto& i : v) a.push_back(to_json(i));
    return a;
  };
  auto cams = json::array();
  for (auto& c : g.camera_rig) cams.push_back(clearsim::to_json(c));
  return {{"object_catalog", items(g.object_catalog)},
      {"object_count", {g.object_count.min, g.object_count.max}},
      {"spawn_region", {{"min", clearsim::to_json(g.spawn_region.min)}, {"max", clearsim::to_json(g.spawn_region.max)}}},
      {"drop_height_m", g.drop_height_m}, {"impulse_intensity", g.impulse_intensity},
      {"prop_catalog", items(g.prop_catalog)}, {"prop_count", {g.prop_count.min, g.prop_count.max}},
      {"backdrop_bank", g.backdrop_bank}, {"hdri_bank", g.hdri_bank}, {"camera_rig", cams},
      {"light_template", clearsim::to_json(g.light_template)}, {"depth_range_m", g.depth_range_m},
      {"max_placement_attempts", g.max_placement_attempts}};
}

// Reads the keys present in `r` over `base`.
generation_config read_generation(const json_reader& r, generation_config base) {
  r.allow_only({"object_catalog", "object_count", "spawn_region", "drop_height_m",
      "impulse_intensity", "prop_catalog", "prop_count", "backdrop_bank", "hdri_bank", "camera_rig",
      "light_template", "depth_range_m", "max_placement_attempts"});
  auto g = std::move(base);
  if (r.has("object_catalog")) g.object_catalog = read_items(r, "object_catalog");
  g.object_count = read_range(r, "object_count", g.object_count);
  if (r.has("spawn_region")) {
    auto b = r.child("spawn_region");
    b.allow_only({"min", "max"});
    g.spawn_region.min = b.vector3("min");
    g.spawn_region.max = b.vector3("max");
  }
  g.drop_height_m = r.number("drop_height_m", g.drop_height_m);
  g.impulse_intensity = r.number("impulse_intensity", g.impulse_intensity);
  if (r.has("prop_catalog")) g.prop_catalog = read_items(r, "prop_catalog");
  g.prop_count = read_range(r, "prop_count", g.prop_count);
  if (r.has("backdrop_bank")) g.backdrop_bank = r.strings("backdrop_bank");
  if (r.has("hdri_bank")) g.hdri_bank = r.strings("hdri_bank");
  if (r.has("camera_rig")) {
    g.camera_rig.clear();
    for (auto& c : r.array("camera_rig")) g.camera_rig.push_back(read_camera(c));
  }
  if (r.has("light_template")) g.light_template = read_light(r.child("light_template"));
  g.depth_range_m = r.number("depth_range_m", g.depth_range_m);
  g.max_placement_attempts =
      static_cast<uint32_t>(r.uint("max_placement_attempts", g.max_placement_attempts));
  return g;
}

}  // namespace

// -----------------------------------------------------------------------------
// TOOL CONFIG
// -----------------------------------------------------------------------------

void validate_tool_config(const tool_config& c) {
  validate_settings(c.render);
  if (c.image_width < 1 || c.image_height < 1) throw validation_error("image_size", "must be at least 1x1");
  for (auto& p : c.passes)
    if (!known_passes().count(p)) throw validation_error("passes", "unknown pass '" + p + "'");
  if (!(c.caustic_tau > 0)) throw validation_error("caustic_tau", "must be positive");
  if (c.outline_thickness_px < 1) throw validation_error("outline_thickness_px", "must be at least 1");
  if (!(c.boundary_threshold_m > 0)) throw validation_error("boundary_threshold_m", "must be positive");
  parse_class_filter(c.mask_filter);
  if (c.workers < 1) throw validation_error("workers", "must be at least 1");
  if (c.threads < 0) throw validation_error("threads", "must be non-negative");
  if (!c.asset_root.empty() && !std::filesystem::is_directory(c.asset_root))
    throw io_error("asset_root: directory not found: " + c.asset_root.string());
}

tool_config parse_tool_config(const std::string& text, const std::filesystem::path& base_dir) {
  auto root = parse_json_text(text, "config");
  if (!root.is_object()) throw parse_error("config: expected an object");
  auto r = json_reader(root, "");
  r.allow_only({"asset_root", "render", "generation", "image_size", "passes", "caustic_tau",
      "outline_thickness_px", "boundary_threshold_m", "mask_filter", "workers", "threads"});
  auto c = tool_config{};
  if (r.has("asset_root")) {
    auto p = std::filesystem::path(r.string("asset_root"));
    c.asset_root = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (r.has("render")) c.render = read_settings(r.child("render"), c.render);
  if (r.has("image_size")) {
    auto v = r.numbers("image_size");
    if (v.size() != 2) throw validation_error(r.field("image_size"), "expected [width, height]");
    c.image_width = static_cast<int>(v[0]);
    c.image_height = static_cast<int>(v[1]);
  }
  if (r.has("generation")) {
    // checked now, applied over the catalog defaults later
    read_generation(r.child("generation"), generation_config{});
    c.generation_overrides = dump_canonical(root["generation"]);
  }
  if (r.has("passes")) {
    auto list = r.strings("passes");
    c.passes = {list.begin(), list.end()};
  }
  c.caustic_tau = r.number("caustic_tau", c.caustic_tau);
  c.outline_thickness_px = static_cast<uint32_t>(r.uint("outline_thickness_px", c.outline_thickness_px));
  c.boundary_threshold_m = r.number("boundary_threshold_m", c.boundary_threshold_m);
  c.mask_filter = r.string("mask_filter", c.mask_filter);
  c.workers = r.integer("workers", c.workers);
  c.threads = r.integer("threads", c.threads);
  validate_tool_config(c);
  return c;
}

tool_config load_tool_config(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return parse_tool_config(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

std::string serialize_tool_config(const tool_config& c) {
  auto j = json{{"render", settings_to_json(c.render)}, {"image_size", {c.image_width, c.image_height}},
      {"passes", std::vector<std::string>(c.passes.begin(), c.passes.end())},
      {"caustic_tau", c.caustic_tau}, {"outline_thickness_px", c.outline_thickness_px},
      {"boundary_threshold_m", c.boundary_threshold_m}, {"mask_filter", c.mask_filter},
      {"workers", c.workers}, {"threads", c.threads}};
  if (!c.asset_root.empty()) j["asset_root"] = c.asset_root.string();
  if (c.generation) {
    j["generation"] = generation_to_json(*c.generation);
  } else if (!c.generation_overrides.empty()) {
    j["generation"] = parse_json_text(c.generation_overrides, "generation");
  }
  return dump_canonical(j);
}

std::shared_ptr<const asset_catalog> open_catalog(const tool_config& config) {
  auto root = resolve_asset_root(config.asset_root);
  if (root.empty()) return std::make_shared<const asset_catalog>(make_default_catalog());
  if (!std::filesystem::is_directory(root)) throw io_error("asset root not found: " + root.string());
  return std::make_shared<const asset_catalog>(load_catalog(root));
}

generation_config effective_generation_config(const tool_config& config, const asset_catalog& catalog) {
  if (config.generation) return *config.generation;
  auto g = default_generation_config(catalog, config.image_width, config.image_height);
  if (config.generation_overrides.empty()) return g;
  auto root = parse_json_text(config.generation_overrides, "generation");
  return read_generation(json_reader(root, "generation"), std::move(g));
}

}  // namespace clearsim
