#include "clearsim/scene_gen.h"

#include <cmath>

#include "clearsim/error.h"

namespace clearsim {

namespace {

void check_items(const std::vector<catalog_item>& items, const char* field,
    const asset_catalog& catalog, bool required) {
  if (required && items.empty()) throw validation_error(field, "must not be empty");
  for (size_t i = 0; i < items.size(); i++) {
    auto path = std::string(field) + "[" + std::to_string(i) + "]";
    if (!(items[i].weight > 0) || !std::isfinite(items[i].weight))
      throw validation_error(path + ".weight", "must be positive");
    if (!(items[i].scale > 0) || !std::isfinite(items[i].scale))
      throw validation_error(path + ".scale", "must be positive");
    if (!catalog.has_mesh(items[i].mesh))
      throw asset_error(path + ".mesh: unknown mesh '" + items[i].mesh + "'");
  }
}

const catalog_item& pick_weighted(const std::vector<catalog_item>& items, rng_stream& stream) {
  auto total = 0.0;
  for (auto& item : items) total += item.weight;
  auto u = stream.uniform() * total;
  for (auto& item : items) {
    if (u < item.weight) return item;
    u -= item.weight;
  }
  return items.back();
}

uint32_t draw_count(const count_range& range, rng_stream& stream) {
  return range.min + static_cast<uint32_t>(stream.uniform_index(uint64_t(range.max) - range.min + 1));
}

// Draws one settled instance, retrying until it clears every placed footprint.
object_instance drop_item(const catalog_item& item, uint32_t object_id, semantic_class semantic,
    const generation_config& config, const asset_catalog& catalog,
    const std::vector<footprint>& placed, rng_stream& stream) {
  auto proxy = make_settle_proxy(catalog, item.mesh, item.scale, object_id);
  for (uint32_t attempt = 0; attempt < config.max_placement_attempts; attempt++) {
    auto spawn = vec2{stream.uniform(config.spawn_region.min.x, config.spawn_region.max.x),
        stream.uniform(config.spawn_region.min.y, config.spawn_region.max.y)};
    auto transform = settle_drop(proxy, spawn, config.impulse_intensity, stream);
    transform.scale = item.scale;
    auto fp = footprint{{transform.translation.x, transform.translation.y}, proxy.bounding_radius_m};
    auto clear = true;
    for (auto& other : placed) {
      if (footprints_conflict(fp, other)) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    auto instance = object_instance{};
    instance.object_id = object_id;
    instance.mesh = item.mesh;
    instance.transform = transform;
    instance.material = item.material;
    instance.semantic = semantic;
    return instance;
  }
  throw placement_error("could not place object " + std::to_string(object_id) + " ('" + item.mesh +
                        "') after " + std::to_string(config.max_placement_attempts) +
                        " attempts; spawn region too small for the requested count");
}

}  // namespace

void validate_generation_config(const generation_config& config, const asset_catalog& catalog) {
  if (config.object_count.min > config.object_count.max)
    throw validation_error("object_count", "min exceeds max");
  if (config.prop_count.min > config.prop_count.max)
    throw validation_error("prop_count", "min exceeds max");
  auto e = config.spawn_region.extent();
  if (!(e.x > 0 && e.y > 0 && e.z > 0) || !isfinite(e))
    throw validation_error("spawn_region", "must have positive volume");
  if (!(config.drop_height_m > 0)) throw validation_error("drop_height_m", "must be positive");
  if (!(config.impulse_intensity >= 0) || !std::isfinite(config.impulse_intensity))
    throw validation_error("impulse_intensity", "must be non-negative");
  if (!(config.depth_range_m > 0)) throw validation_error("depth_range_m", "must be positive");
  if (config.max_placement_attempts == 0)
    throw validation_error("max_placement_attempts", "must be positive");
  check_items(config.object_catalog, "object_catalog", catalog, config.object_count.max > 0);
  check_items(config.prop_catalog, "prop_catalog", catalog, config.prop_count.max > 0);
  if (config.backdrop_bank.empty()) throw validation_error("backdrop_bank", "must not be empty");
  if (config.hdri_bank.empty()) throw validation_error("hdri_bank", "must not be empty");
  for (auto& key : config.backdrop_bank)
    if (!catalog.has_backdrop(key)) throw asset_error("backdrop_bank: unknown backdrop '" + key + "'");
  for (auto& key : config.hdri_bank)
    if (!catalog.has_environment(key)) throw asset_error("hdri_bank: unknown environment '" + key + "'");
  if (config.camera_rig.empty()) throw validation_error("camera_rig", "must not be empty");
}

settle_proxy make_settle_proxy(
    const asset_catalog& catalog, const std::string& mesh_key, double scale, uint32_t object_id) {
  auto& shape = catalog.get_settle_shape(mesh_key);
  if (shape.poses.empty()) throw asset_error("mesh '" + mesh_key + "' has no stable rest pose");
  auto proxy = settle_proxy{};
  proxy.object_id = object_id;
  proxy.bounding_radius_m = shape.bounding_radius * scale;
  for (auto& pose : shape.poses) {
    proxy.rest_orientations.push_back(pose.orientation);
    proxy.rest_heights.push_back(pose.rest_height * scale);
  }
  return proxy;
}

rigid_transform settle_drop(
    const settle_proxy& proxy, const vec2& spawn_xy, double impulse, rng_stream& stream) {
  auto pose = stream.uniform_index(proxy.rest_orientations.size());
  auto yaw = stream.uniform(0, 2 * pi);
  auto radius = impulse * proxy.bounding_radius_m * std::sqrt(stream.uniform());
  auto angle = stream.uniform(0, 2 * pi);
  auto t = rigid_transform{};
  t.rotation = normalize(axis_angle({0, 0, 1}, yaw) * proxy.rest_orientations[pose]);
  t.translation = {spawn_xy.x + radius * std::cos(angle), spawn_xy.y + radius * std::sin(angle),
      proxy.rest_heights[pose]};
  return t;
}

footprint instance_footprint(const object_instance& o, const asset_catalog& catalog) {
  auto& shape = catalog.get_settle_shape(o.mesh);
  return {{o.transform.translation.x, o.transform.translation.y},
      shape.bounding_radius * o.transform.scale};
}

bool footprints_conflict(const footprint& a, const footprint& b) {
  auto dx = a.center.x - b.center.x, dy = a.center.y - b.center.y;
  auto overlap = a.radius + b.radius - std::sqrt(dx * dx + dy * dy);
  return overlap > 0.1 * std::min(a.radius, b.radius);
}

scene generate_scene(const generation_config& config, const asset_catalog& catalog, uint64_t seed) {
  validate_generation_config(config, catalog);
  auto s = scene{};
  s.seed = seed;
  s.depth_range_m = config.depth_range_m;
  s.cameras = config.camera_rig;
  s.lights = {config.light_template};

  auto banks = rng_stream::substream(seed, "banks");
  auto backdrop_key = config.backdrop_bank[banks.uniform_index(config.backdrop_bank.size())];
  s.environment.id = config.hdri_bank[banks.uniform_index(config.hdri_bank.size())];
  s.environment.rotation_deg = banks.uniform(0, 360);

  auto counts = rng_stream::substream(seed, "object-count");
  auto n = draw_count(config.object_count, counts);
  auto placed = std::vector<footprint>{};
  for (uint32_t i = 0; i < n; i++) {
    auto stream = rng_stream::substream(seed, "object", {i});
    auto& item = pick_weighted(config.object_catalog, stream);
    auto o = drop_item(item, i + 1, semantic_class::transparent, config, catalog, placed, stream);
    placed.push_back(instance_footprint(o, catalog));
    s.objects.push_back(std::move(o));
  }

  auto props = rng_stream::substream(seed, "props");
  s.backdrop.object_id = 0;
  s = place_props(s, config, catalog, props);

  // the backdrop takes the id after every object and prop
  auto& backdrop = catalog.get_backdrop(backdrop_key);
  s.backdrop.object_id = static_cast<uint32_t>(s.objects.size() + s.props.size() + 1);
  s.backdrop.mesh = backdrop.mesh;
  s.backdrop.material = backdrop.material;
  s.backdrop.semantic = semantic_class::backdrop;
  return s;
}

scene place_props(const scene& input, const generation_config& config,
    const asset_catalog& catalog, rng_stream& stream) {
  auto s = input;
  auto placed = std::vector<footprint>{};
  auto next_id = uint32_t{1};
  for (auto& o : s.objects) {
    placed.push_back(instance_footprint(o, catalog));
    next_id = std::max(next_id, o.object_id + 1);
  }
  for (auto& o : s.props) {
    placed.push_back(instance_footprint(o, catalog));
    next_id = std::max(next_id, o.object_id + 1);
  }
  auto n = draw_count(config.prop_count, stream);
  for (uint32_t i = 0; i < n; i++) {
    auto& item = pick_weighted(config.prop_catalog, stream);
    if (next_id == s.backdrop.object_id) next_id++;
    auto o = drop_item(item, next_id++, semantic_class::prop, config, catalog, placed, stream);
    placed.push_back(instance_footprint(o, catalog));
    s.props.push_back(std::move(o));
  }

  return s;
}

generation_config default_generation_config(
    const asset_catalog& catalog, int image_width, int image_height) {
  auto config = generation_config{};
  auto glass = glass_material{};
  auto frosted = glass;
  frosted.roughness = 0.15;
  auto flint = glass;
  flint.base_ior = 1.62;
  flint.abbe_number = 36;
  for (auto& [key, weight, material] : std::vector<std::tuple<std::string, double, glass_material>>{
           {"sphere", 1.0, glass}, {"tumbler", 1.0, glass}, {"goblet", 1.0, glass},
           {"bottle", 1.0, frosted}, {"cube", 0.7, flint}, {"prism", 0.5, flint}}) {
    if (catalog.has_mesh(key)) config.object_catalog.push_back({key, weight, 1.0, material});
  }
  auto props = std::vector<std::pair<std::string, vec3>>{
      {"block", {0.7, 0.2, 0.15}}, {"can", {0.2, 0.35, 0.7}}, {"ball", {0.85, 0.75, 0.2}}};
  for (auto& [key, albedo] : props) {
    auto material = diffuse_material{};
    material.albedo = albedo;
    if (catalog.has_mesh(key)) config.prop_catalog.push_back({key, 1.0, 1.0, material});
  }
  config.backdrop_bank = catalog.backdrop_bank;
  config.hdri_bank = catalog.hdri_bank;

  config.light_template.center = {0.5, -0.35, 1.4};
  config.light_template.direction = normalize(vec3{0, 0, 0.02} - config.light_template.center);
  config.light_template.radius_m = 0.02;
  config.light_template.cone_half_angle = 35 * pi / 180;
  config.light_template.intensity = {4, 4, 4};

  // rig of 12 depth cameras around the table at varied heights
  for (int i = 0; i < 12; i++) {
    auto azimuth = 2 * pi * i / 12 + (i % 2 ? 0.12 : -0.12);
    auto elevation = (25 + 10 * (i % 3)) * pi / 180;
    auto distance = 0.95 + 0.15 * ((i / 3) % 2);
    auto eye = vec3{distance * std::cos(elevation) * std::cos(azimuth),
        distance * std::cos(elevation) * std::sin(azimuth), distance * std::sin(elevation)};
    config.camera_rig.push_back(
        make_look_at_camera(eye, {0, 0, 0.04}, image_width, image_height, 42 * pi / 180));
  }
  return config;
}

}  // namespace clearsim
