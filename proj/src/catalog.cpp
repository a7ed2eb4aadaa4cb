#include "clearsim/catalog.h"

#include <cstdio>
#include <cstdlib>

#include "clearsim/error.h"
#include "clearsim/image_io.h"
#include "clearsim/rng.h"
#include "json_util.h"

namespace clearsim {

asset_catalog::asset_catalog() : settle_cache_(std::make_shared<settle_cache>()) {}

void asset_catalog::add_mesh(const std::string& key, mesh m) {
  if (m.triangles.empty()) throw asset_error("mesh '" + key + "' has no triangles");
  meshes_[key] = std::make_shared<const mesh>(std::move(m));
  auto lock = std::lock_guard(settle_cache_->mutex);
  settle_cache_->shapes.erase(key);
}

void asset_catalog::add_texture(const std::string& key, image<rgb32f> texels) {
  if (texels.size() == 0) throw asset_error("texture '" + key + "' is empty");
  textures_[key] = std::make_shared<const image<rgb32f>>(std::move(texels));
}

void asset_catalog::add_environment(const std::string& key, image<rgb32f> texels) {
  if (texels.size() == 0) throw asset_error("environment '" + key + "' is empty");
  for (auto& t : texels.pixels)
    if (!(std::isfinite(t.r) && std::isfinite(t.g) && std::isfinite(t.b)) || t.r < 0 ||
        t.g < 0 || t.b < 0)
      throw validation_error("environments." + key, "texels must be finite and >= 0");
  environments_[key] = std::make_shared<const image<rgb32f>>(std::move(texels));
}

void asset_catalog::add_backdrop(const std::string& key, backdrop_asset backdrop) {
  backdrops_[key] = std::move(backdrop);
}

const mesh& asset_catalog::get_mesh(const std::string& key) const {
  auto it = meshes_.find(key);
  if (it == meshes_.end()) throw asset_error("unknown mesh '" + key + "'");
  return *it->second;
}

const image<rgb32f>& asset_catalog::get_texture(const std::string& key) const {
  auto it = textures_.find(key);
  if (it == textures_.end()) throw asset_error("unknown texture '" + key + "'");
  return *it->second;
}

const image<rgb32f>& asset_catalog::get_environment(const std::string& key) const {
  auto it = environments_.find(key);
  if (it == environments_.end()) throw asset_error("unknown environment '" + key + "'");
  return *it->second;
}

const backdrop_asset& asset_catalog::get_backdrop(const std::string& key) const {
  auto it = backdrops_.find(key);
  if (it == backdrops_.end()) throw asset_error("unknown backdrop '" + key + "'");
  return it->second;
}

const settle_shape& asset_catalog::get_settle_shape(const std::string& mesh_key) const {
  auto& m = get_mesh(mesh_key);
  auto lock = std::lock_guard(settle_cache_->mutex);
  auto& slot = settle_cache_->shapes[mesh_key];
  if (!slot) slot = std::make_shared<const settle_shape>(compute_settle_shape(m));
  return *slot;
}

namespace {
template <typename Map>
std::vector<std::string> keys_of(const Map& m) {
  auto out = std::vector<std::string>{};
  for (auto& [k, _] : m) out.push_back(k);
  return out;
}
}  // namespace

std::vector<std::string> asset_catalog::mesh_keys() const { return keys_of(meshes_); }
std::vector<std::string> asset_catalog::texture_keys() const { return keys_of(textures_); }
std::vector<std::string> asset_catalog::environment_keys() const { return keys_of(environments_); }
std::vector<std::string> asset_catalog::backdrop_keys() const { return keys_of(backdrops_); }

// -----------------------------------------------------------------------------
// DISK FORMAT
// -----------------------------------------------------------------------------

asset_catalog load_catalog(const std::filesystem::path& root) {
  auto manifest = root / "catalog.json";
  if (!std::filesystem::exists(manifest))
    throw io_error("asset catalog manifest not found: " + manifest.string());
  auto bytes = read_file(manifest);
  auto j = parse_json_text(std::string(bytes.begin(), bytes.end()), manifest.string());
  auto r = json_reader(j, "catalog");
  r.allow_only({"meshes", "textures", "environments", "backdrops", "hdri_bank", "backdrop_bank"});
  auto catalog = asset_catalog{};
  auto files = [&](const char* key, auto&& add) {
    if (!r.has(key)) return;
    auto section = r.child(key);
    for (auto& [name, value] : section.node().items()) {
      if (!value.is_string())
        throw parse_error(section.field(name) + ": expected a relative file path");
      auto path = root / value.template get<std::string>();
      if (!std::filesystem::exists(path)) throw asset_error("missing asset file " + path.string());
      add(name, path);
    }
  };
  files("meshes", [&](const std::string& k, const auto& p) { catalog.add_mesh(k, load_obj(p)); });
  files("textures", [&](const std::string& k, const auto& p) {
    catalog.add_texture(k, decode_pfm_rgb(read_file(p)));
  });
  files("environments", [&](const std::string& k, const auto& p) {
    catalog.add_environment(k, decode_pfm_rgb(read_file(p)));
  });
  if (r.has("backdrops")) {
    auto section = r.child("backdrops");
    for (auto& [name, value] : section.node().items()) {
      auto entry = json_reader(value, section.field(name));
      entry.allow_only({"mesh", "material"});
      auto b = backdrop_asset{entry.string("mesh"), read_diffuse(entry.child("material"))};
      if (!catalog.has_mesh(b.mesh))
        throw asset_error(entry.field("mesh") + ": unknown mesh '" + b.mesh + "'");
      catalog.add_backdrop(name, b);
    }
  }
  catalog.hdri_bank = r.has("hdri_bank") ? r.strings("hdri_bank") : catalog.environment_keys();
  catalog.backdrop_bank =
      r.has("backdrop_bank") ? r.strings("backdrop_bank") : catalog.backdrop_keys();
  for (auto& k : catalog.hdri_bank)
    if (!catalog.has_environment(k)) throw asset_error("hdri_bank: unknown environment '" + k + "'");
  for (auto& k : catalog.backdrop_bank)
    if (!catalog.has_backdrop(k)) throw asset_error("backdrop_bank: unknown backdrop '" + k + "'");
  return catalog;
}

void save_catalog(const asset_catalog& catalog, const std::filesystem::path& root) {
  auto ec = std::error_code{};
  for (auto dir : {"meshes", "textures", "hdri"}) {
    std::filesystem::create_directories(root / dir, ec);
    if (ec) throw io_error("cannot create " + (root / dir).string() + ": " + ec.message());
  }
  auto j = json{{"meshes", json::object()}, {"textures", json::object()},
      {"environments", json::object()}, {"backdrops", json::object()},
      {"hdri_bank", catalog.hdri_bank}, {"backdrop_bank", catalog.backdrop_bank}};
  for (auto& k : catalog.mesh_keys()) {
    auto rel = "meshes/" + k + ".obj";
    save_obj(catalog.get_mesh(k), root / rel);
    j["meshes"][k] = rel;
  }
  for (auto& k : catalog.texture_keys()) {
    auto rel = "textures/" + k + ".pfm";
    write_file_atomic(root / rel, encode_pfm(catalog.get_texture(k)));
    j["textures"][k] = rel;
  }
  for (auto& k : catalog.backdrop_keys()) {
    auto& b = catalog.get_backdrop(k);
    j["backdrops"][k] = {{"mesh", b.mesh}, {"material", to_json(b.material)}};
  }
  for (auto& k : catalog.environment_keys()) {
    auto rel = "hdri/" + k + ".pfm";
    write_file_atomic(root / rel, encode_pfm(catalog.get_environment(k)));
    j["environments"][k] = rel;
  }
  write_file_atomic(root / "catalog.json", dump_canonical(j));
}

// -----------------------------------------------------------------------------
// DEFAULT ASSETS
// -----------------------------------------------------------------------------

namespace {

std::string numbered(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%02d", prefix, i);
  return buf;
}

// Sky gradient over a darker ground with a soft sun lobe.
image<rgb32f> make_sky(int index, int width, int height) {
  auto rng = rng_stream::substream(0, "default-hdri", {uint64_t(index)});
  auto zenith = vec3{rng.uniform(0.15, 0.45), rng.uniform(0.25, 0.55), rng.uniform(0.5, 0.95)};
  auto horizon = vec3{rng.uniform(0.6, 1.0), rng.uniform(0.6, 0.95), rng.uniform(0.55, 0.9)};
  auto ground = vec3{rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.25), rng.uniform(0.08, 0.2)};
  auto sun_phi = rng.uniform(0, 2 * pi);
  auto sun_elevation = rng.uniform(0.2, 1.2);
  auto sun_dir = vec3{std::cos(sun_elevation) * std::cos(sun_phi),
      std::cos(sun_elevation) * std::sin(sun_phi), std::sin(sun_elevation)};
  auto sun_strength = rng.uniform(2.0, 6.0);
  auto sun_width = rng.uniform(0.08, 0.2);
  auto brightness = rng.uniform(0.6, 1.4);
  auto img = image<rgb32f>(width, height);
  for (int y = 0; y < height; y++) {
    auto theta = pi * (y + 0.5) / height;
    for (int x = 0; x < width; x++) {
      auto phi = 2 * pi * (x + 0.5) / width;
      auto d = vec3{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
      auto c = d.z >= 0 ? lerp(horizon, zenith, std::sqrt(d.z)) : lerp(horizon, ground, std::min(1.0, -d.z * 4));
      auto angle = std::acos(std::clamp(dot(d, sun_dir), -1.0, 1.0));
      c += vec3{1.0, 0.95, 0.85} * (sun_strength * std::exp(-angle * angle / (2 * sun_width * sun_width)));
      img(x, y) = to_rgb32f(c * brightness);
    }
  }
  return img;
}

image<rgb32f> make_checker_texture(const vec3& a, const vec3& b) {
  auto img = image<rgb32f>(64, 64);
  for (int y = 0; y < 64; y++)
    for (int x = 0; x < 64; x++) img(x, y) = to_rgb32f(((x / 32) ^ (y / 32)) ? a : b);
  return img;
}

image<rgb32f> make_wood_texture() {
  auto img = image<rgb32f>(64, 64);
  for (int y = 0; y < 64; y++) {
    for (int x = 0; x < 64; x++) {
      auto ring = 0.5 + 0.5 * std::sin(x * 0.6 + 2.0 * std::sin(y * 0.1));
      img(x, y) = to_rgb32f(lerp(vec3{0.45, 0.28, 0.14}, vec3{0.62, 0.42, 0.22}, ring));
    }
  }
  return img;
}

image<rgb32f> make_cloth_texture() {
  auto img = image<rgb32f>(64, 64);
  for (int y = 0; y < 64; y++) {
    for (int x = 0; x < 64; x++) {
      auto weave = ((x % 4) < 2) != ((y % 4) < 2) ? 1.0 : 0.8;
      img(x, y) = to_rgb32f(vec3{0.55, 0.58, 0.62} * weave);
    }
  }
  return img;
}

}  // namespace

asset_catalog make_default_catalog(int hdri_count, int backdrop_count) {
  auto catalog = asset_catalog{};
  // glassware
  catalog.add_mesh("sphere", make_uv_sphere(0.04, 96, 48));
  catalog.add_mesh("tumbler", make_lathe({{0, -0.045}, {0.03, -0.045}, {0.034, 0.045}, {0, 0.045}}, 64));
  catalog.add_mesh("goblet",
      make_lathe({{0, -0.06}, {0.03, -0.06}, {0.03, -0.055}, {0.005, -0.05}, {0.005, 0.0},
                     {0.032, 0.025}, {0.038, 0.06}, {0, 0.06}},
          64));
  catalog.add_mesh("bottle", make_lathe({{0, -0.08}, {0.03, -0.08}, {0.03, 0.03}, {0.012, 0.06},
                                            {0.012, 0.08}, {0, 0.08}},
                                 64));
  catalog.add_mesh("cube", make_box({0.03, 0.03, 0.03}));
  catalog.add_mesh("prism", make_prism(0.08, 0.06, 0.05));
  // props
  catalog.add_mesh("block", make_box({0.05, 0.035, 0.025}));
  catalog.add_mesh("can", make_cylinder(0.033, 0.1, 48));
  catalog.add_mesh("ball", make_uv_sphere(0.035, 32, 16));
  // backdrop geometry
  catalog.add_mesh("ground", make_ground_plane(3.0));
  catalog.add_mesh("corner", make_corner_backdrop(3.0, 1.5));

  catalog.add_texture("checker", make_checker_texture({0.8, 0.8, 0.78}, {0.25, 0.25, 0.27}));
  catalog.add_texture("wood", make_wood_texture());
  catalog.add_texture("cloth", make_cloth_texture());

  for (int i = 0; i < hdri_count; i++) {
    auto key = numbered("sky", i);
    catalog.add_environment(key, make_sky(i, 64, 32));
    catalog.hdri_bank.push_back(key);
  }
  const char* textures[] = {"", "wood", "checker", "cloth"};
  for (int i = 0; i < backdrop_count; i++) {
    auto rng = rng_stream::substream(0, "default-backdrop", {uint64_t(i)});
    auto b = backdrop_asset{};
    b.mesh = i % 3 == 0 ? "corner" : "ground";
    b.material.albedo = {rng.uniform(0.2, 0.85), rng.uniform(0.2, 0.85), rng.uniform(0.2, 0.85)};
    b.material.texture = textures[i % 4];
    b.material.texture_scale_m = rng.uniform(0.15, 0.5);
    auto key = numbered("backdrop", i);
    catalog.add_backdrop(key, b);
    catalog.backdrop_bank.push_back(key);
  }
  return catalog;
}

std::filesystem::path resolve_asset_root(const std::filesystem::path& configured) {
  if (auto* env = std::getenv("CLEARSIM_ASSET_ROOT"); env && *env) return env;
  return configured;
}

}  // namespace clearsim
