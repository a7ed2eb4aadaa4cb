#include "clearsim/render.h"

#include <array>
#include <atomic>
#include <bit>
#include <mutex>
#include <thread>

#include "clearsim/error.h"
#include "clearsim/optics.h"

namespace clearsim {

// -----------------------------------------------------------------------------
// SETTINGS
// -----------------------------------------------------------------------------

void validate_settings(const render_settings& settings) {
  if (settings.samples_per_pixel < 1)
    throw validation_error("samples_per_pixel", "must be at least 1");
  if (settings.caustics_enabled && settings.photon_count == 0)
    throw validation_error("photon_count", "must be positive when caustics are enabled");
  if (!(settings.photon_gather_radius_m > 0) || !std::isfinite(settings.photon_gather_radius_m))
    throw validation_error("photon_gather_radius_m", "must be positive");
  if (!std::isfinite(settings.exposure_ev)) throw validation_error("exposure_ev", "must be finite");
}

uint64_t settings_hash(const render_settings& s) {
  auto h = fnv1a64("render-settings/1");
  h = hash_combine(h, s.samples_per_pixel);
  h = hash_combine(h, s.max_bounces);
  h = hash_combine(h, s.caustics_enabled);
  h = hash_combine(h, s.photon_count);
  h = hash_combine(h, std::bit_cast<uint64_t>(s.photon_gather_radius_m));
  h = hash_combine(h, s.frame_seed);
  h = hash_combine(h, static_cast<uint64_t>(s.tonemap));
  h = hash_combine(h, std::bit_cast<uint64_t>(s.exposure_ev));
  return h;
}

uint64_t scene_hash(const scene& s) { return fnv1a64(serialize_scene(s)); }

// -----------------------------------------------------------------------------
// CAMERA
// -----------------------------------------------------------------------------

vec3 camera_forward(const camera& cam) { return rotate(cam.pose.rotation, {0, 0, -1}); }

ray3 camera_ray(const camera& cam, double px, double py) {
  auto tan_half = std::tan(cam.vertical_fov / 2);
  auto aspect = double(cam.width) / cam.height;
  auto x = (2 * px / cam.width - 1) * tan_half * aspect;
  auto y = (1 - 2 * py / cam.height) * tan_half;
  auto r = ray3{};
  r.origin = cam.pose.translation;
  r.direction = normalize(rotate(cam.pose.rotation, normalize(vec3{x, y, -1})));
  return r;
}

// -----------------------------------------------------------------------------
// CONTEXT
// -----------------------------------------------------------------------------

namespace {

struct instance_data {
  uint32_t object_id = 0;
  semantic_class semantic = semantic_class::none;
  bool is_glass = false;
  glass_material glass;
  std::array<double, 3> band_ior = {1.5, 1.5, 1.5};
  bool dispersive = false;
  diffuse_material diffuse;
  const image<rgb32f>* texture = nullptr;
};

struct triangle_info {
  uint32_t instance = 0;
  std::array<uint32_t, 3> vertices;  // into the world normal array
};

struct surface {
  double t = 0;
  vec3 position;
  vec3 geometric_normal;  // outward per winding
  vec3 shading_normal;
  const instance_data* instance = nullptr;
};

}  // namespace

struct render_context::impl {
  scene source;
  std::vector<instance_data> instances;
  std::vector<triangle_info> tri_info;
  std::vector<vec3> normals;
  bvh accel;
  const image<rgb32f>* environment = nullptr;
  double environment_rotation = 0;
  std::vector<area_light> lights;  // enabled only
  bool has_glass = false;
  vec3 glass_center;
  double glass_radius = 0;

  std::optional<surface> intersect(const ray3& ray) const {
    auto hit = accel.intersect(ray);
    if (!hit) return std::nullopt;
    auto& tri = accel.triangles()[hit->primitive];
    auto& info = tri_info[hit->primitive];
    auto w = 1 - hit->u - hit->v;
    auto sf = surface{};
    sf.t = hit->t;
    sf.position = tri.v0 * w + tri.v1 * hit->u + tri.v2 * hit->v;
    sf.geometric_normal = normalize(cross(tri.v1 - tri.v0, tri.v2 - tri.v0));
    auto ns = normals[info.vertices[0]] * w + normals[info.vertices[1]] * hit->u +
              normals[info.vertices[2]] * hit->v;
    sf.shading_normal = length_squared(ns) > 0 ? normalize(ns) : sf.geometric_normal;
    if (dot(sf.shading_normal, sf.geometric_normal) <= 0) sf.shading_normal = sf.geometric_normal;
    sf.instance = &instances[info.instance];
    return sf;
  }

  vec3 environment_radiance(const vec3& d) const {
    if (!environment) return {};
    auto& env = *environment;
    auto phi = std::atan2(d.y, d.x) - environment_rotation;
    auto u = phi / (2 * pi);
    u -= std::floor(u);
    auto v = std::acos(std::clamp(d.z, -1.0, 1.0)) / pi;
    auto x = std::min(env.width - 1, static_cast<int>(u * env.width));
    auto y = std::min(env.height - 1, static_cast<int>(v * env.height));
    return to_vec3(env(x, y));
  }

  vec3 albedo(const surface& sf) const {
    auto& inst = *sf.instance;
    if (!inst.texture) return inst.diffuse.albedo;
    auto& tex = *inst.texture;
    auto n = sf.shading_normal;
    auto p = sf.position / inst.diffuse.texture_scale_m;
    double a, b;
    if (std::abs(n.z) >= std::abs(n.x) && std::abs(n.z) >= std::abs(n.y)) {
      a = p.x, b = p.y;
    } else if (std::abs(n.y) >= std::abs(n.x)) {
      a = p.x, b = p.z;
    } else {
      a = p.y, b = p.z;
    }
    a -= std::floor(a);
    b -= std::floor(b);
    auto x = std::min(tex.width - 1, static_cast<int>(a * tex.width));
    auto y = std::min(tex.height - 1, static_cast<int>((1 - b) * tex.height));
    auto c = to_vec3(tex(x, y));
    return {std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0), std::clamp(c.z, 0.0, 1.0)};
  }
};

render_context::render_context(const scene& s, const asset_catalog& catalog)
    : impl_(std::make_unique<impl>()) {
  validate_scene(s, &catalog);
  auto& d = *impl_;
  d.source = s;
  auto triangles = std::vector<triangle>{};
  auto glass_box = bbox3{};
  for_each_instance(s, [&](const object_instance& o) {
    auto inst = instance_data{};
    inst.object_id = o.object_id;
    inst.semantic = o.semantic;
    if (auto* g = std::get_if<glass_material>(&o.material)) {
      inst.is_glass = true;
      inst.glass = *g;
      if (g->abbe_number) {
        auto b = dispersion_band_iors(*g);
        inst.band_ior = {b.red, b.green, b.blue};
        inst.dispersive = true;
      } else {
        inst.band_ior = {g->base_ior, g->base_ior, g->base_ior};
      }
    } else {
      inst.diffuse = std::get<diffuse_material>(o.material);
      if (!inst.diffuse.texture.empty()) inst.texture = &catalog.get_texture(inst.diffuse.texture);
    }
    auto index = static_cast<uint32_t>(d.instances.size());
    d.instances.push_back(inst);

    auto& m = catalog.get_mesh(o.mesh);
    auto base = static_cast<uint32_t>(d.normals.size());
    auto world = std::vector<vec3>(m.positions.size());
    for (size_t i = 0; i < m.positions.size(); i++) {
      world[i] = o.transform.apply_point(m.positions[i]);
      d.normals.push_back(normalize(o.transform.apply_vector(m.normals[i])));
      if (inst.is_glass) glass_box.expand(world[i]);
    }
    for (auto& t : m.triangles) {
      triangles.push_back({world[t[0]], world[t[1]], world[t[2]]});
      d.tri_info.push_back({index, {base + t[0], base + t[1], base + t[2]}});
    }
  });
  d.accel = bvh(triangles);
  d.environment = &catalog.get_environment(s.environment.id);
  d.environment_rotation = s.environment.rotation_deg * pi / 180;
  for (auto& l : s.lights)
    if (l.enabled) d.lights.push_back(l);
  if (!glass_box.empty()) {
    d.has_glass = true;
    d.glass_center = glass_box.center();
    d.glass_radius = length(glass_box.extent()) / 2 * (1 + 1e-6) + 1e-6;
  }
}

render_context::~render_context() = default;

const scene& render_context::source() const { return impl_->source; }

// -----------------------------------------------------------------------------
// TRANSPORT
// -----------------------------------------------------------------------------

namespace {

using context_data = render_context::impl;

double offset_epsilon(const vec3& p) {
  return 1e-6 * std::max(1.0, max_component(max(p, -p)));
}

ray3 spawn_ray(const vec3& p, const vec3& normal_side, const vec3& direction) {
  auto r = ray3{};
  r.origin = p + normal_side * offset_epsilon(p);
  r.direction = direction;
  return r;
}

struct glass_outcome {
  bool alive = false;
  ray3 next;
  vec3 weight = {1, 1, 1};
};

// Samples reflection or transmission at a glass surface. Locks the path to
// one wavelength band on its first dispersive interaction.
glass_outcome glass_event(const surface& sf, const vec3& d, int& band, rng_stream& stream) {
  auto& inst = *sf.instance;
  auto& g = inst.glass;
  auto out = glass_outcome{};
  if (inst.dispersive && band < 0) {
    band = static_cast<int>(stream.uniform_index(3));
    out.weight = vec3{band == 0 ? 3.0 : 0.0, band == 1 ? 3.0 : 0.0, band == 2 ? 3.0 : 0.0};
  }
  auto ior = band < 0 ? g.base_ior : inst.band_ior[band];
  auto thin = g.thickness == thickness_mode::thin_walled;
  auto front = dot(d, sf.geometric_normal) < 0;
  auto ng = front ? sf.geometric_normal : -sf.geometric_normal;
  auto ns = front ? sf.shading_normal : -sf.shading_normal;
  auto entering = thin || front;
  auto n1 = entering ? 1.0 : ior;
  auto n2 = entering ? ior : 1.0;

  auto u1 = stream.uniform(), u2 = stream.uniform(), u3 = stream.uniform();
  auto rough = g.roughness > 0;
  auto alpha = ggx_alpha(g.roughness);
  auto m = rough ? ggx_sample_normal(ns, alpha, u1, u2) : ns;
  auto cos_i = -dot(d, m);
  if (cos_i <= 0) return out;
  auto fresnel = fresnel_reflectance(cos_i, n1, n2);
  vec3 next;
  bool reflected = u3 < fresnel;
  if (reflected) {
    next = normalize(reflect(d, m));
    if (dot(next, ng) <= 0) return out;
    out.weight *= g.specular_scale;
  } else {
    if (thin) {
      next = d;
    } else {
      auto t = refract(d, m, n1 / n2);
      if (!t) return out;
      next = *t;
    }
    if (dot(next, ng) >= 0) return out;
    if (entering) out.weight *= g.tint;
  }
  if (rough) {
    auto cos_o = std::abs(dot(next, ns));
    auto cos_in = std::abs(dot(d, ns));
    auto cos_m = dot(m, ns);
    auto w = ggx_g1(cos_in, alpha) * ggx_g1(cos_o, alpha) * cos_i / std::max(cos_in * cos_m, 1e-12);
    out.weight *= std::min(w, 1.0);
  }
  out.next = spawn_ray(sf.position, reflected ? ng : -ng, next);
  out.alive = true;
  return out;
}

vec3 sample_disc(const area_light& light, rng_stream& stream) {
  auto u1 = stream.uniform(), u2 = stream.uniform();
  if (light.radius_m <= 0) return light.center;
  auto f = basis_from_normal(normalize(light.direction));
  auto r = light.radius_m * std::sqrt(u1);
  auto phi = 2 * pi * u2;
  return light.center + f.x * (r * std::cos(phi)) + f.y * (r * std::sin(phi));
}

vec3 cosine_hemisphere(const vec3& n, double u1, double u2) {
  auto r = std::sqrt(u1);
  auto phi = 2 * pi * u2;
  auto f = basis_from_normal(n);
  return normalize(f.to_world({r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1 - u1))}));
}

vec3 direct_light(const context_data& ctx, const vec3& p, const vec3& n, const vec3& ng,
    rng_stream& stream) {
  auto total = vec3{};
  for (auto& light : ctx.lights) {
    auto y = sample_disc(light, stream);
    auto to_light = y - p;
    auto dist2 = length_squared(to_light);
    if (dist2 <= 0) continue;
    auto dist = std::sqrt(dist2);
    auto wi = to_light / dist;
    auto cos_s = dot(n, wi);
    if (cos_s <= 0 || dot(ng, wi) <= 0) continue;
    if (dot(-wi, normalize(light.direction)) < std::cos(light.cone_half_angle)) continue;
    auto shadow = spawn_ray(p, ng, wi);
    shadow.tmax = dist * (1 - 1e-9);
    if (ctx.accel.occluded(shadow)) continue;
    total += light.intensity * (cos_s / dist2);
  }
  return total;
}

vec3 gather_caustics(const photon_map& photons, const vec3& p, const vec3& n, double radius) {
  auto flux = vec3{};
  photons.for_each_within(p, radius, [&](const photon& ph) {
    if (dot(ph.normal, n) > 0.5) flux += ph.power;
  });
  return flux / (pi * radius * radius);
}

vec3 trace_path(const context_data& ctx, ray3 ray, rng_stream& stream,
    const render_settings& settings, const photon_map* photons) {
  auto radiance = vec3{};
  auto throughput = vec3{1, 1, 1};
  auto band = -1;
  auto gathered = false;
  for (uint32_t depth = 0; depth <= settings.max_bounces; depth++) {
    auto sf = ctx.intersect(ray);
    if (!sf) {
      radiance += throughput * ctx.environment_radiance(ray.direction);
      break;
    }
    if (sf->instance->is_glass) {
      if (depth == settings.max_bounces) break;
      auto g = glass_event(*sf, ray.direction, band, stream);
      if (!g.alive) break;
      throughput *= g.weight;
      ray = g.next;
      continue;
    }
    auto front = dot(ray.direction, sf->geometric_normal) < 0;
    auto ng = front ? sf->geometric_normal : -sf->geometric_normal;
    auto ns = front ? sf->shading_normal : -sf->shading_normal;
    auto brdf = ctx.albedo(*sf) * inv_pi;
    radiance += throughput * brdf * direct_light(ctx, sf->position, ns, ng, stream);
    if (!gathered) {
      gathered = true;
      if (photons && !photons->empty())
        radiance += throughput * brdf *
                    gather_caustics(*photons, sf->position, ns, settings.photon_gather_radius_m);
    }
    if (depth == settings.max_bounces) break;
    auto u1 = stream.uniform(), u2 = stream.uniform();
    auto next = cosine_hemisphere(ns, u1, u2);
    if (dot(next, ng) <= 0) break;
    throughput *= ctx.albedo(*sf);
    ray = spawn_ray(sf->position, ng, next);
  }
  return radiance;
}

template <typename Func>
void parallel_for(size_t count, int threads, Func&& func) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<size_t>(threads, count));
  if (threads <= 1) {
    for (size_t i = 0; i < count; i++) func(i);
    return;
  }
  auto next = std::atomic<size_t>{0};
  auto failure = std::exception_ptr{};
  auto failure_mutex = std::mutex{};
  auto workers = std::vector<std::thread>{};
  for (int t = 0; t < threads; t++) {
    workers.emplace_back([&] {
      try {
        for (auto i = next++; i < count; i = next++) func(i);
      } catch (...) {
        auto lock = std::lock_guard(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

struct tile {
  int x0, y0, x1, y1;
};

std::vector<tile> make_tiles(int width, int height, int size) {
  size = std::max(1, size);
  auto tiles = std::vector<tile>{};
  for (int y = 0; y < height; y += size)
    for (int x = 0; x < width; x += size)
      tiles.push_back({x, y, std::min(width, x + size), std::min(height, y + size)});
  return tiles;
}

const camera& checked_camera(const scene& s, int camera_index) {
  if (camera_index < 0 || camera_index >= static_cast<int>(s.cameras.size()))
    throw render_error("camera index " + std::to_string(camera_index) + " out of range (scene has " +
                       std::to_string(s.cameras.size()) + " cameras)");
  return s.cameras[camera_index];
}

}  // namespace

// -----------------------------------------------------------------------------
// PHOTONS
// -----------------------------------------------------------------------------

photon_map trace_photons(
    const render_context& context, const render_settings& settings, const execution_options& exec) {
  auto& ctx = context.internals();
  if (!ctx.has_glass || ctx.lights.empty() || settings.photon_count == 0) return {};
  constexpr uint32_t max_depth = 32;
  constexpr size_t chunk = 4096;
  auto lights = ctx.lights.size();
  auto stored = std::vector<photon>{};
  for (size_t l = 0; l < lights; l++) {
    auto& light = ctx.lights[l];
    auto n = settings.photon_count / lights + (l < settings.photon_count % lights ? 1 : 0);
    if (n == 0) continue;
    auto axis = normalize(light.direction);
    auto cos_cone = std::cos(light.cone_half_angle);
    auto chunks = (n + chunk - 1) / chunk;
    auto results = std::vector<std::vector<photon>>(chunks);
    parallel_for(chunks, exec.threads, [&](size_t c) {
      for (auto k = c * chunk; k < std::min<size_t>(n, (c + 1) * chunk); k++) {
        auto stream = rng_stream::substream(settings.frame_seed, "photon", {l, k});
        auto origin = sample_disc(light, stream);
        auto u1 = stream.uniform(), u2 = stream.uniform();
        // aim at the glass bounding sphere when it subtends less than the cone
        auto to_glass = ctx.glass_center - origin;
        auto dist = length(to_glass);
        auto cos_cap = dist > ctx.glass_radius
                           ? std::sqrt(1 - (ctx.glass_radius / dist) * (ctx.glass_radius / dist))
                           : -1.0;
        auto use_cap = cos_cap > cos_cone;
        auto cos_max = use_cap ? cos_cap : cos_cone;
        auto center = use_cap ? to_glass / dist : axis;
        auto cos_t = 1 - u1 * (1 - cos_max);
        auto sin_t = std::sqrt(std::max(0.0, 1 - cos_t * cos_t));
        auto f = basis_from_normal(center);
        auto dir = normalize(f.to_world({sin_t * std::cos(2 * pi * u2), sin_t * std::sin(2 * pi * u2), cos_t}));
        if (dot(dir, axis) < cos_cone) continue;
        auto solid_angle = 2 * pi * (1 - cos_max);
        auto power = light.intensity * (solid_angle / n);
        auto ray = ray3{origin, dir};
        auto band = -1;
        uint8_t bounces = 0;
        for (uint32_t depth = 0; depth < max_depth; depth++) {
          auto sf = ctx.intersect(ray);
          if (!sf) break;
          if (!sf->instance->is_glass) {
            if (bounces > 0) {
              auto ph = photon{};
              ph.position = sf->position;
              ph.direction = ray.direction;
              ph.normal = dot(ray.direction, sf->shading_normal) < 0 ? sf->shading_normal
                                                                     : -sf->shading_normal;
              ph.power = power;
              ph.band = static_cast<int8_t>(band);
              ph.specular_bounces = bounces;
              results[c].push_back(ph);
            }
            break;
          }
          if (sf->instance->glass.roughness > 0.3) break;
          auto g = glass_event(*sf, ray.direction, band, stream);
          if (!g.alive) break;
          power *= g.weight;
          bounces = static_cast<uint8_t>(std::min(255, bounces + 1));
          ray = g.next;
        }
      }
    });
    for (auto& r : results) stored.insert(stored.end(), r.begin(), r.end());
  }
  return photon_map(std::move(stored));
}

// -----------------------------------------------------------------------------
// FRAMES
// -----------------------------------------------------------------------------

gbuffer render_gbuffer(const render_context& context, int camera_index, const execution_options& exec) {
  auto& ctx = context.internals();
  auto& cam = checked_camera(ctx.source, camera_index);
  auto forward = camera_forward(cam);
  auto out = gbuffer{};
  out.texels = image<gbuffer_texel>(cam.width, cam.height);
  auto tiles = make_tiles(cam.width, cam.height, exec.tile_size);
  parallel_for(tiles.size(), exec.threads, [&](size_t i) {
    auto& t = tiles[i];
    for (int y = t.y0; y < t.y1; y++) {
      for (int x = t.x0; x < t.x1; x++) {
        auto ray = camera_ray(cam, x + 0.5, y + 0.5);
        auto& texel = out.texels(x, y);
        auto sf = ctx.intersect(ray);
        if (!sf) continue;
        texel.object_id = sf->instance->object_id;
        texel.semantic = sf->instance->semantic;
        texel.is_transparent_hit = sf->instance->is_glass;
        texel.depth_m = sf->t * dot(ray.direction, forward);
        texel.world_normal = sf->shading_normal;
        texel.world_position = sf->position;
      }
    }
  });
  return out;
}

frame_render render_frame(const render_context& context, int camera_index,
    const render_settings& settings, const execution_options& exec, const photon_map* photons) {
  validate_settings(settings);
  auto& ctx = context.internals();
  auto& cam = checked_camera(ctx.source, camera_index);
  auto traced = photon_map{};
  if (settings.caustics_enabled && !photons) {
    traced = trace_photons(context, settings, exec);
    photons = &traced;
  }
  if (!settings.caustics_enabled) photons = nullptr;

  auto out = frame_render{};
  out.gbuf = render_gbuffer(context, camera_index, exec);
  out.radiance.texels = image<rgb32f>(cam.width, cam.height);
  out.radiance.caustics_enabled = settings.caustics_enabled;
  out.radiance.camera_exposure_ev = cam.exposure_ev;
  auto pair_settings = settings;
  pair_settings.caustics_enabled = false;
  out.radiance.pair_hash = hash_combine(hash_combine(scene_hash(ctx.source), camera_index),
      settings_hash(pair_settings));

  auto tiles = make_tiles(cam.width, cam.height, exec.tile_size);
  auto spp = settings.samples_per_pixel;
  parallel_for(tiles.size(), exec.threads, [&](size_t i) {
    auto& t = tiles[i];
    for (int y = t.y0; y < t.y1; y++) {
      for (int x = t.x0; x < t.x1; x++) {
        auto sum = vec3{};
        for (uint32_t s = 0; s < spp; s++) {
          auto stream = rng_stream::substream(
              settings.frame_seed, "pixel", {uint64_t(x), uint64_t(y), uint64_t(s)});
          auto jx = stream.uniform(), jy = stream.uniform();
          auto ray = camera_ray(cam, x + jx, y + jy);
          auto l = trace_path(ctx, ray, stream, settings, photons);
          if (isfinite(l)) sum += max(l, vec3{});
        }
        out.radiance.texels(x, y) = to_rgb32f(sum / spp);
      }
    }
  });
  return out;
}

frame_render render_frame(const scene& s, const asset_catalog& catalog, int camera_index,
    const render_settings& settings, const execution_options& exec) {
  auto context = render_context(s, catalog);
  return render_frame(context, camera_index, settings, exec);
}

// -----------------------------------------------------------------------------
// TONE MAPPING
// -----------------------------------------------------------------------------

uint8_t tone_map_value(double linear, double exposure_ev, tonemap_mode mode) {
  auto v = linear * std::exp2(exposure_ev);
  if (!(v > 0)) return 0;
  if (mode == tonemap_mode::gamma_srgb)
    v = v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1 / 2.4) - 0.055;
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(v * 255));
}

image<rgb8> tone_map(const radiance_image& img, const render_settings& settings) {
  auto ev = settings.exposure_ev + img.camera_exposure_ev;
  auto out = image<rgb8>(img.texels.width, img.texels.height);
  for (size_t i = 0; i < out.pixels.size(); i++) {
    auto& c = img.texels.pixels[i];
    out.pixels[i] = {tone_map_value(c.r, ev, settings.tonemap),
        tone_map_value(c.g, ev, settings.tonemap), tone_map_value(c.b, ev, settings.tonemap)};
  }
  return out;
}

}  // namespace clearsim
