//
// Tool configuration: asset location, default render settings, generation
// parameters, pass selection and annotation thresholds. Stored as JSON; every
// section is optional and falls back to the defaults below.
//

#ifndef CLEARSIM_CONFIG_H_
#define CLEARSIM_CONFIG_H_

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "clearsim/catalog.h"
#include "clearsim/groundtruth.h"
#include "clearsim/render.h"
#include "clearsim/scene_gen.h"

namespace clearsim {

// Pass names accepted in configs and capture plans.
const std::set<std::string>& known_passes();
std::set<std::string> all_passes();

struct tool_config {
  // Empty: the built-in default catalog.
  std::filesystem::path asset_root;
  render_settings render;
  // Generation starts from default_generation_config() over the catalog;
  // `generation_overrides` (JSON text, a partial section) layers on top, and
  // a set `generation` replaces both.
  std::optional<generation_config> generation;
  std::string generation_overrides;
  int image_width = 1920;
  int image_height = 1080;
  std::set<std::string> passes = all_passes();
  double caustic_tau = 0.01;
  uint32_t outline_thickness_px = 3;
  double boundary_threshold_m = 0.005;
  std::string mask_filter = "transparent";
  int workers = 1;
  int threads = 0;
};

// Throws validation_error for out-of-range values and unknown passes, and
// io_error when the asset root does not exist.
void validate_tool_config(const tool_config& config);

tool_config parse_tool_config(const std::string& text, const std::filesystem::path& base_dir = {});
tool_config load_tool_config(const std::filesystem::path& path);
std::string serialize_tool_config(const tool_config& config);

// Resolves the asset root (honouring CLEARSIM_ASSET_ROOT) and loads or builds
// the catalog.
std::shared_ptr<const asset_catalog> open_catalog(const tool_config& config);

generation_config effective_generation_config(const tool_config& config, const asset_catalog& catalog);

std::string serialize_settings(const render_settings& settings);
render_settings parse_settings(const std::string& text);

}  // namespace clearsim

#endif
