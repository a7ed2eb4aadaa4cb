//
// Capture planning and execution. A plan crosses scene seeds, rig cameras and
// main-light angles; every frame is rendered into
// `root/scene_{seed}/frame_{id}/` with a `frame.json` sidecar written after
// its rasters, and `root/manifest.json` is written once every frame is done.
//

#ifndef CLEARSIM_DATASET_H_
#define CLEARSIM_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clearsim/catalog.h"
#include "clearsim/config.h"
#include "clearsim/render.h"

namespace clearsim {

inline constexpr const char* generator_version = "clearsim/0.1.0";

struct capture_plan {
  std::vector<uint64_t> scene_seeds;
  uint32_t cameras_per_scene = 12;
  std::vector<double> light_angles_deg = {0};
  std::set<std::string> passes = all_passes();
  render_settings settings;
  std::filesystem::path output_root;
  tool_config config;
};

// Throws validation_error for empty dimensions or unknown passes.
void validate_plan(const capture_plan& plan);

capture_plan parse_plan(const std::string& text, const std::filesystem::path& base_dir = {});
capture_plan load_plan(const std::filesystem::path& path);

struct frame_spec {
  uint64_t scene_seed = 0;
  uint32_t camera = 0;
  double light_angle_deg = 0;
  std::string tag;
  std::string frame_id;
};

// `{seed:016x}_{cam:02}_{tag}`
std::string make_frame_id(uint64_t seed, uint32_t camera, const std::string& tag);

// Scene-major, then camera, then angle.
std::vector<frame_spec> plan_frames(const capture_plan& plan);

struct manifest_entry {
  std::string frame_id;
  uint64_t scene_seed = 0;
  uint32_t camera = 0;
  std::string tag;
  double light_angle_deg = 0;
  uint64_t settings_hash = 0;
  double depth_range_m = 10;
  std::map<std::string, std::string> files;  // name -> path relative to the root
};

struct manifest {
  std::string generator;
  std::vector<manifest_entry> frames;
  std::map<std::string, std::string> errors;  // frame id -> message
};

std::string serialize_manifest(const manifest& m);
manifest parse_manifest(const std::string& text);

std::filesystem::path scene_dir(uint64_t seed);
std::filesystem::path frame_dir(const frame_spec& spec);

struct execution_report {
  size_t rendered = 0;
  size_t skipped = 0;
  size_t failed = 0;
};

// Resumable: frames whose sidecar matches the settings hash and whose files
// all exist are skipped. Per-frame failures land in the manifest's error
// section; I/O failures abort. `progress` is called once per finished frame.
manifest execute_plan(const capture_plan& plan, const asset_catalog& catalog, int workers,
    execution_report* report = nullptr,
    const std::function<void(const frame_spec&, bool skipped)>& progress = {});

// Renders one frame of a plan into `plan.output_root` and returns its entry.
manifest_entry capture_frame(const capture_plan& plan, const asset_catalog& catalog,
    const scene& base, const frame_spec& spec, int threads);

// Problems found in a dataset tree; empty when the manifest exists, frame ids
// are unique and every listed file exists and decodes.
std::vector<std::string> verify_dataset(const std::filesystem::path& root);

struct frame_inspection {
  std::string summary;
  std::vector<std::string> problems;  // missing or corrupt files
};
frame_inspection inspect_frame(const std::filesystem::path& frame_directory);

}  // namespace clearsim

#endif
