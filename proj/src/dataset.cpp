#include "clearsim/dataset.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "clearsim/ablation.h"
#include "clearsim/error.h"
#include "clearsim/groundtruth.h"
#include "clearsim/image_io.h"
#include "clearsim/rng.h"
#include "clearsim/scene_gen.h"
#include "json_util.h"

namespace clearsim {

namespace fs = std::filesystem;

// -----------------------------------------------------------------------------
// PLAN
// -----------------------------------------------------------------------------

void validate_plan(const capture_plan& plan) {
  if (plan.scene_seeds.empty()) throw validation_error("scene_seeds", "plan has no scenes");
  if (plan.cameras_per_scene == 0) throw validation_error("cameras_per_scene", "must be at least 1");
  if (plan.light_angles_deg.empty()) throw validation_error("light_angles_deg", "plan has no light angles");
  for (auto a : plan.light_angles_deg)
    if (!std::isfinite(a)) throw validation_error("light_angles_deg", "angles must be finite");
  for (auto& p : plan.passes)
    if (!known_passes().count(p)) throw validation_error("passes", "unknown pass '" + p + "'");
  auto seeds = plan.scene_seeds;
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end())
    throw validation_error("scene_seeds", "duplicate seed");
  auto tags = std::vector<std::string>{};
  for (auto a : plan.light_angles_deg) tags.push_back(light_angle_tag(a));
  std::sort(tags.begin(), tags.end());
  if (std::adjacent_find(tags.begin(), tags.end()) != tags.end())
    throw validation_error("light_angles_deg", "two angles share a tag");
  if (plan.output_root.empty()) throw validation_error("output_root", "must be set");
  validate_settings(plan.settings);
}

capture_plan parse_plan(const std::string& text, const fs::path& base_dir) {
  auto root = parse_json_text(text, "plan");
  if (!root.is_object()) throw parse_error("plan: expected an object");
  auto r = json_reader(root, "");
  r.allow_only({"config", "scene_seeds", "scene_seed_range", "cameras_per_scene", "light_angles_deg",
      "passes", "settings", "output_root"});
  auto resolve = [&](const std::string& p) {
    auto path = fs::path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  auto plan = capture_plan{};
  if (r.has("config")) {
    auto& c = root["config"];
    if (c.is_string()) {
      plan.config = load_tool_config(resolve(c.get<std::string>()));
    } else if (c.is_object()) {
      plan.config = parse_tool_config(c.dump(), base_dir);
    } else {
      throw validation_error("config", "expected a path or an object");
    }
  }
  plan.settings = plan.config.render;
  plan.passes = plan.config.passes;
  if (r.has("scene_seeds")) {
    for (auto& s : root["scene_seeds"]) {
      if (!s.is_number_unsigned()) throw validation_error("scene_seeds", "expected unsigned integers");
      plan.scene_seeds.push_back(s.get<uint64_t>());
    }
  }
  if (r.has("scene_seed_range")) {
    auto v = r.numbers("scene_seed_range");
    if (v.size() != 2 || v[0] < 0 || v[1] < 0)
      throw validation_error("scene_seed_range", "expected [first, count]");
    for (uint64_t i = 0; i < uint64_t(v[1]); i++) plan.scene_seeds.push_back(uint64_t(v[0]) + i);
  }
  plan.cameras_per_scene = static_cast<uint32_t>(r.uint("cameras_per_scene", plan.cameras_per_scene));
  if (r.has("light_angles_deg")) plan.light_angles_deg = r.numbers("light_angles_deg");
  if (r.has("passes")) {
    auto list = r.strings("passes");
    plan.passes = {list.begin(), list.end()};
  }
  if (r.has("settings")) plan.settings = read_settings(r.child("settings"), plan.settings);
  if (r.has("output_root")) plan.output_root = resolve(r.string("output_root"));
  validate_plan(plan);
  return plan;
}

capture_plan load_plan(const fs::path& path) {
  auto bytes = read_file(path);
  return parse_plan(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

std::string make_frame_id(uint64_t seed, uint32_t camera, const std::string& tag) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 "_%02u_", seed, camera);
  return buf + tag;
}

std::vector<frame_spec> plan_frames(const capture_plan& plan) {
  validate_plan(plan);
  auto frames = std::vector<frame_spec>{};
  frames.reserve(plan.scene_seeds.size() * plan.cameras_per_scene * plan.light_angles_deg.size());
  for (auto seed : plan.scene_seeds) {
    for (uint32_t cam = 0; cam < plan.cameras_per_scene; cam++) {
      for (auto angle : plan.light_angles_deg) {
        auto tag = light_angle_tag(angle);
        frames.push_back({seed, cam, angle, tag, make_frame_id(seed, cam, tag)});
      }
    }
  }
  return frames;
}

fs::path scene_dir(uint64_t seed) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "scene_%016" PRIx64, seed);
  return buf;
}

fs::path frame_dir(const frame_spec& spec) {
  return scene_dir(spec.scene_seed) / ("frame_" + spec.frame_id);
}

// -----------------------------------------------------------------------------
// MANIFEST
// -----------------------------------------------------------------------------

namespace {

json entry_to_json(const manifest_entry& e) {
  return {{"frame_id", e.frame_id}, {"scene_seed", e.scene_seed}, {"camera", e.camera}, {"tag", e.tag},
      {"light_angle_deg", e.light_angle_deg}, {"settings_hash", e.settings_hash},
      {"depth_range_m", e.depth_range_m}, {"files", e.files}};
}

manifest_entry read_entry(const json_reader& r) {
  auto e = manifest_entry{};
  e.frame_id = r.string("frame_id");
  e.scene_seed = r.uint("scene_seed");
  e.camera = static_cast<uint32_t>(r.uint("camera"));
  e.tag = r.string("tag");
  e.light_angle_deg = r.number("light_angle_deg");
  e.settings_hash = r.uint("settings_hash");
  e.depth_range_m = r.number("depth_range_m");
  auto& files = r.node().at("files");
  if (!files.is_object()) throw validation_error(r.field("files"), "expected an object");
  for (auto& [k, v] : files.items()) {
    if (!v.is_string()) throw validation_error(r.field("files." + k), "expected a path");
    e.files[k] = v.get<std::string>();
  }
  return e;
}

}  // namespace

std::string serialize_manifest(const manifest& m) {
  auto frames = json::array();
  for (auto& e : m.frames) frames.push_back(entry_to_json(e));
  return dump_canonical({{"format", "clearsim-manifest/1"}, {"generator_version", m.generator},
      {"frames", frames}, {"errors", m.errors}});
}

manifest parse_manifest(const std::string& text) {
  auto root = parse_json_text(text, "manifest");
  if (!root.is_object()) throw parse_error("manifest: expected an object");
  auto r = json_reader(root, "");
  if (r.string("format") != "clearsim-manifest/1") throw parse_error("manifest: unknown format");
  auto m = manifest{};
  m.generator = r.string("generator_version");
  for (auto& e : r.array("frames")) m.frames.push_back(read_entry(e));
  if (r.has("errors")) {
    for (auto& [k, v] : root["errors"].items()) {
      if (!v.is_string()) throw validation_error("errors." + k, "expected a message");
      m.errors[k] = v.get<std::string>();
    }
  }
  return m;
}

// -----------------------------------------------------------------------------
// EXECUTION
// -----------------------------------------------------------------------------

namespace {

// Hash over everything besides the render settings that shapes a frame's
// files: the derived scene and the annotation parameters.
uint64_t inputs_hash(const capture_plan& plan, const scene& derived, uint32_t camera) {
  auto& c = plan.config;
  auto h = hash_combine(scene_hash(derived), camera);
  auto params = json{{"passes", std::vector<std::string>(plan.passes.begin(), plan.passes.end())},
      {"caustic_tau", c.caustic_tau}, {"outline_thickness_px", c.outline_thickness_px},
      {"boundary_threshold_m", c.boundary_threshold_m}, {"mask_filter", c.mask_filter}};
  return hash_combine(h, fnv1a64(params.dump()));
}

void write_sidecar(const fs::path& dir, const manifest_entry& e, uint64_t inputs) {
  auto j = entry_to_json(e);
  j["inputs_hash"] = inputs;
  j["generator_version"] = generator_version;
  write_file_atomic(dir / "frame.json", dump_canonical(j));
}

// Entry recorded by a previous run, when it matches and its files exist.
std::optional<manifest_entry> reusable_entry(
    const fs::path& root, const fs::path& dir, uint64_t settings, uint64_t inputs) {
  auto sidecar = dir / "frame.json";
  if (!fs::exists(sidecar)) return std::nullopt;
  try {
    auto bytes = read_file(sidecar);
    auto j = parse_json_text(std::string(bytes.begin(), bytes.end()), "frame.json");
    auto r = json_reader(j, "");
    auto e = read_entry(r);
    if (e.settings_hash != settings || r.uint("inputs_hash") != inputs) return std::nullopt;
    for (auto& [name, rel] : e.files)
      if (!fs::is_regular_file(root / rel)) return std::nullopt;
    return e;
  } catch (const error&) {
    return std::nullopt;
  }
}

}  // namespace

manifest_entry capture_frame(const capture_plan& plan, const asset_catalog& catalog, const scene& base,
    const frame_spec& spec, int threads) {
  auto& config = plan.config;
  auto derived = apply_delta(base, light_angle_delta(spec.light_angle_deg));
  if (spec.camera >= derived.cameras.size())
    throw validation_error("cameras_per_scene", "scene has " + std::to_string(derived.cameras.size()) +
                                                    " cameras, frame asks for camera " +
                                                    std::to_string(spec.camera));
  auto rel_dir = frame_dir(spec);
  auto dir = plan.output_root / rel_dir;
  fs::create_directories(dir);

  auto context = render_context(derived, catalog);
  auto exec = execution_options{};
  exec.threads = threads;
  auto cam_index = static_cast<int>(spec.camera);
  auto& cam = derived.cameras[spec.camera];
  auto result = render_frame(context, cam_index, plan.settings, exec);
  auto& gbuf = result.gbuf;

  auto entry = manifest_entry{};
  entry.frame_id = spec.frame_id;
  entry.scene_seed = spec.scene_seed;
  entry.camera = spec.camera;
  entry.tag = spec.tag;
  entry.light_angle_deg = spec.light_angle_deg;
  entry.settings_hash = settings_hash(plan.settings);
  entry.depth_range_m = derived.depth_range_m;

  auto emit = [&](const std::string& file, const byte_buffer& bytes) {
    write_file_atomic(dir / file, bytes);
    entry.files[file.substr(0, file.find('.')) + (file.ends_with(".pfm") ? "_pfm" : "")] =
        (rel_dir / file).generic_string();
  };
  emit("rgb.png", encode_png8(tone_map(result.radiance, plan.settings)));
  emit("rgb.pfm", encode_pfm(result.radiance.texels));

  auto& passes = plan.passes;
  if (passes.count("depth")) emit("depth.png", encode_png16(depth_pass(gbuf, derived.depth_range_m)));
  if (passes.count("normals_world")) emit("normals_world.png", encode_png8(quantize_rgb(normals_world_pass(gbuf))));
  if (passes.count("normals_camera"))
    emit("normals_camera.png", encode_png8(quantize_rgb(normals_camera_pass(gbuf, cam))));
  if (passes.count("mask") || passes.count("outline")) {
    auto mask = mask_pass(gbuf, parse_class_filter(config.mask_filter));
    if (passes.count("mask")) emit("mask.png", encode_png16(mask_to_u16(mask)));
    if (passes.count("outline")) emit("outline.png", encode_png8(outline_pass(mask, config.outline_thickness_px)));
  }
  if (passes.count("boundary")) {
    auto labels = mask_pass(gbuf, class_filter::all());
    emit("boundary.png", encode_png8(encode_boundary(boundary_pass(gbuf, labels, config.boundary_threshold_m))));
  }
  if (passes.count("caustics")) {
    auto on_settings = plan.settings;
    on_settings.caustics_enabled = true;
    auto off_settings = plan.settings;
    off_settings.caustics_enabled = false;
    auto on = plan.settings.caustics_enabled ? std::move(result.radiance)
                                             : render_frame(context, cam_index, on_settings, exec).radiance;
    auto off = render_frame(context, cam_index, off_settings, exec).radiance;
    emit("caustics.png", encode_png8(encode_caustics(caustics_pass(on, off, gbuf, config.caustic_tau))));
  }
  write_sidecar(dir, entry, inputs_hash(plan, derived, spec.camera));
  return entry;
}

manifest execute_plan(const capture_plan& plan, const asset_catalog& catalog, int workers,
    execution_report* report, const std::function<void(const frame_spec&, bool)>& progress) {
  validate_plan(plan);
  if (workers < 1) throw validation_error("workers", "must be at least 1");
  auto& root = plan.output_root;
  auto manifest_path = root / "manifest.json";
  try {
    fs::create_directories(root);
    fs::remove(manifest_path);
  } catch (const fs::filesystem_error& e) {
    throw io_error("cannot prepare output root " + root.string() + ": " + e.what());
  }

  auto gen = effective_generation_config(plan.config, catalog);
  if (plan.cameras_per_scene > gen.camera_rig.size())
    throw validation_error("cameras_per_scene", "rig has only " + std::to_string(gen.camera_rig.size()) +
                                                    " cameras");
  auto frames = plan_frames(plan);

  // Scenes are generated up front; a seed that fails to generate fails all of
  // its frames.
  auto scenes = std::map<uint64_t, scene>{};
  auto scene_errors = std::map<uint64_t, std::string>{};
  for (auto seed : plan.scene_seeds) {
    try {
      auto s = generate_scene(gen, catalog, seed);
      fs::create_directories(root / scene_dir(seed));
      save_scene(s, root / scene_dir(seed) / "scene.json");
      scenes.emplace(seed, std::move(s));
    } catch (const io_error&) {
      throw;
    } catch (const fs::filesystem_error& e) {
      throw io_error(e.what());
    } catch (const std::exception& e) {
      scene_errors[seed] = e.what();
    }
  }

  auto settings = settings_hash(plan.settings);
  auto threads = workers > 1 ? 1 : plan.config.threads;
  auto entries = std::vector<std::optional<manifest_entry>>(frames.size());
  auto messages = std::vector<std::string>(frames.size());
  auto skipped = std::vector<char>(frames.size(), 0);
  auto next = std::atomic<size_t>{0};
  auto abort = std::atomic<bool>{false};
  auto fatal = std::exception_ptr{};
  auto lock = std::mutex{};

  auto work = [&] {
    for (;;) {
      if (abort) return;
      auto i = next.fetch_add(1);
      if (i >= frames.size()) return;
      auto& spec = frames[i];
      try {
        if (auto it = scene_errors.find(spec.scene_seed); it != scene_errors.end()) {
          messages[i] = "scene generation failed: " + it->second;
        } else {
          auto& base = scenes.at(spec.scene_seed);
          auto derived = apply_delta(base, light_angle_delta(spec.light_angle_deg));
          auto inputs = inputs_hash(plan, derived, spec.camera);
          if (auto prior = reusable_entry(root, root / frame_dir(spec), settings, inputs)) {
            entries[i] = std::move(prior);
            skipped[i] = 1;
          } else {
            entries[i] = capture_frame(plan, catalog, base, spec, threads);
          }
        }
      } catch (const io_error&) {
        auto guard = std::lock_guard(lock);
        if (!fatal) fatal = std::current_exception();
        abort = true;
        return;
      } catch (const fs::filesystem_error& e) {
        auto guard = std::lock_guard(lock);
        if (!fatal) fatal = std::make_exception_ptr(io_error(e.what()));
        abort = true;
        return;
      } catch (const std::exception& e) {
        messages[i] = e.what();
      }
      if (progress) {
        auto guard = std::lock_guard(lock);
        progress(spec, skipped[i] != 0);
      }
    }
  };
  auto count = std::min<size_t>(workers, frames.size());
  if (count <= 1) {
    work();
  } else {
    auto pool = std::vector<std::thread>{};
    for (size_t t = 0; t < count; t++) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  auto m = manifest{};
  m.generator = generator_version;
  auto stats = execution_report{};
  for (size_t i = 0; i < frames.size(); i++) {
    if (entries[i]) {
      m.frames.push_back(std::move(*entries[i]));
      (skipped[i] ? stats.skipped : stats.rendered)++;
    } else {
      m.errors[frames[i].frame_id] = messages[i];
      stats.failed++;
    }
  }
  write_file_atomic(manifest_path, serialize_manifest(m));
  if (report) *report = stats;
  return m;
}

// -----------------------------------------------------------------------------
// VERIFY / INSPECT
// -----------------------------------------------------------------------------

namespace {

// Decodes a dataset file by its name; throws on corrupt data.
void decode_by_name(const fs::path& path) {
  auto bytes = read_file(path);
  auto name = path.filename().string();
  if (name == "rgb.pfm") {
    decode_pfm_rgb(bytes);
  } else if (name == "mask.png" || name == "depth.png") {
    decode_png16(bytes);
  } else if (name == "rgb.png" || name.starts_with("normals_")) {
    decode_png8_rgb(bytes);
  } else {
    decode_png8_gray(bytes);
  }
}

std::string pass_file(const std::string& pass) { return pass + ".png"; }

}  // namespace

std::vector<std::string> verify_dataset(const fs::path& root) {
  auto problems = std::vector<std::string>{};
  auto path = root / "manifest.json";
  if (!fs::exists(path)) return {"manifest.json missing under " + root.string()};
  auto m = manifest{};
  try {
    auto bytes = read_file(path);
    m = parse_manifest(std::string(bytes.begin(), bytes.end()));
  } catch (const error& e) {
    return {std::string("manifest.json unreadable: ") + e.what()};
  }
  auto ids = std::set<std::string>{};
  for (auto& e : m.frames) {
    if (!ids.insert(e.frame_id).second) problems.push_back(e.frame_id + ": duplicate frame id");
    for (auto& [name, rel] : e.files) {
      auto file = root / rel;
      if (!fs::is_regular_file(file)) {
        problems.push_back(e.frame_id + ": missing " + rel);
        continue;
      }
      try {
        decode_by_name(file);
      } catch (const error& ex) {
        problems.push_back(e.frame_id + ": cannot decode " + rel + " (" + ex.what() + ")");
      }
    }
  }
  for (auto& [id, message] : m.errors) problems.push_back(id + ": render failed: " + message);
  return problems;
}

frame_inspection inspect_frame(const fs::path& dir) {
  auto out = frame_inspection{};
  auto sidecar = dir / "frame.json";
  if (!fs::exists(sidecar)) {
    out.problems.push_back("frame.json missing in " + dir.string());
    return out;
  }
  auto entry = manifest_entry{};
  try {
    auto bytes = read_file(sidecar);
    auto j = parse_json_text(std::string(bytes.begin(), bytes.end()), "frame.json");
    entry = read_entry(json_reader(j, ""));
  } catch (const error& e) {
    out.problems.push_back(std::string("frame.json unreadable: ") + e.what());
    return out;
  }

  auto expected = std::vector<std::string>{"rgb.png", "rgb.pfm"};
  for (auto& p : all_passes()) expected.push_back(pass_file(p));
  std::sort(expected.begin() + 2, expected.end());
  auto listed = std::set<std::string>{};
  for (auto& [name, rel] : entry.files) listed.insert(fs::path(rel).filename().string());

  auto text = std::string("frame ") + entry.frame_id + "\n";
  text += "seed " + std::to_string(entry.scene_seed) + " camera " + std::to_string(entry.camera) + " tag " +
          entry.tag + "\n";
  text += "files:\n";
  for (auto& name : expected) {
    auto present = fs::is_regular_file(dir / name);
    auto status = std::string(present ? "present" : (listed.count(name) ? "MISSING" : "not requested"));
    if (present) {
      try {
        decode_by_name(dir / name);
      } catch (const error&) {
        status = "CORRUPT";
      }
    }
    if (status == "MISSING" || status == "CORRUPT") out.problems.push_back(name + " " + status);
    text += "  " + name + "\t" + status + "\n";
  }

  char buf[160];
  auto readable = [&](const char* name) {
    return fs::is_regular_file(dir / name) &&
           std::none_of(out.problems.begin(), out.problems.end(),
               [&](const std::string& p) { return p.starts_with(name); });
  };
  if (readable("depth.png")) {
    auto depth = decode_png16(read_file(dir / "depth.png"));
    auto lo = 65535, hi = 0;
    for (auto v : depth.pixels) {
      if (v == 65535) continue;
      lo = std::min<int>(lo, v);
      hi = std::max<int>(hi, v);
    }
    if (hi < lo) {
      std::snprintf(buf, sizeof(buf), "depth: no hits (range %.3f m)\n", entry.depth_range_m);
    } else {
      std::snprintf(buf, sizeof(buf), "depth: %.4f .. %.4f m (range %.3f m)\n",
          lo / 65535.0 * entry.depth_range_m, hi / 65535.0 * entry.depth_range_m, entry.depth_range_m);
    }
    text += buf;
  }
  if (readable("mask.png")) {
    auto mask = decode_png16(read_file(dir / "mask.png"));
    auto hist = std::map<uint16_t, size_t>{};
    for (auto v : mask.pixels) hist[v]++;
    text += "ids:\n";
    for (auto& [id, n] : hist) text += "  " + std::to_string(id) + "\t" + std::to_string(n) + "\n";
  }
  if (readable("caustics.png")) {
    auto c = decode_png8_gray(read_file(dir / "caustics.png"));
    size_t local = 0, non_local = 0;
    for (auto v : c.pixels) {
      local += v == 128;
      non_local += v == 255;
    }
    text += "caustics: local " + std::to_string(local) + " non_local " + std::to_string(non_local) + "\n";
  }
  out.summary = text;
  return out;
}

}  // namespace clearsim
