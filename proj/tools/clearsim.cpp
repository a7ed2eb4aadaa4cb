// clearsim: scene generation, rendering, ground truth, ablation, capture and
// evaluation from one executable.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 I/O failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "clearsim/ablation.h"
#include "clearsim/config.h"
#include "clearsim/dataset.h"
#include "clearsim/error.h"
#include "clearsim/groundtruth.h"
#include "clearsim/image_io.h"
#include "clearsim/metrics.h"
#include "clearsim/render.h"
#include "clearsim/scene.h"
#include "clearsim/scene_gen.h"

namespace fs = std::filesystem;
using namespace clearsim;

namespace {

struct options {
  std::string config;

  uint64_t seed = 0;
  uint64_t count = 1;
  std::string out;

  std::string scene;
  int camera = 0;
  std::optional<uint32_t> spp;
  std::optional<uint64_t> frame_seed;
  std::string caustics;
  std::optional<int> threads;

  std::string delta;
  std::string settings_out;

  std::string plan;
  bool dry_run = false;
  std::optional<int> workers;

  std::string root;
  std::string pred, gt, mode = "mean", report;
  std::string frame;
  bool list = false;
  std::string export_dir;
};

tool_config load_config(const options& o) {
  return o.config.empty() ? tool_config{} : load_tool_config(o.config);
}

render_settings resolve_settings(const options& o, const tool_config& c) {
  auto s = c.render;
  if (o.spp) s.samples_per_pixel = *o.spp;
  if (o.frame_seed) s.frame_seed = *o.frame_seed;
  if (o.caustics == "on") s.caustics_enabled = true;
  if (o.caustics == "off") s.caustics_enabled = false;
  validate_settings(s);
  return s;
}

execution_options resolve_exec(const options& o, const tool_config& c) {
  auto e = execution_options{};
  e.threads = o.threads.value_or(c.threads);
  return e;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
}

int cmd_generate(const options& o) {
  auto config = load_config(o);
  auto catalog = open_catalog(config);
  auto gen = effective_generation_config(config, *catalog);
  ensure_dir(o.out);
  for (uint64_t i = 0; i < o.count; i++) {
    auto seed = o.seed + i;
    auto s = generate_scene(gen, *catalog, seed);
    save_scene(s, fs::path(o.out) / ("scene_" + std::to_string(seed) + ".json"));
  }
  return 0;
}

int cmd_render(const options& o) {
  auto config = load_config(o);
  auto catalog = open_catalog(config);
  auto s = load_scene(o.scene, catalog.get());
  auto settings = resolve_settings(o, config);
  auto result = render_frame(s, *catalog, o.camera, settings, resolve_exec(o, config));
  auto dir = fs::path(o.out);
  ensure_dir(dir);
  write_file_atomic(dir / "rgb.png", encode_png8(tone_map(result.radiance, settings)));
  write_file_atomic(dir / "rgb.pfm", encode_pfm(result.radiance.texels));
  auto& g = result.gbuf;
  auto depth = image<float>(g.width(), g.height());
  auto normal = image<rgb32f>(g.width(), g.height());
  auto ids = image<uint32_t>(g.width(), g.height());
  for (size_t i = 0; i < g.texels.size(); i++) {
    auto& t = g.texels.pixels[i];
    depth.pixels[i] = static_cast<float>(t.depth_m);
    normal.pixels[i] = to_rgb32f(t.world_normal);
    ids.pixels[i] = t.object_id;
  }
  write_file_atomic(dir / "depth.pfm", encode_pfm(depth));
  write_file_atomic(dir / "normal.pfm", encode_pfm(normal));
  write_file_atomic(dir / "id.png", encode_png16(mask_to_u16(ids)));
  return 0;
}

int cmd_gt(const options& o) {
  auto config = load_config(o);
  auto catalog = open_catalog(config);
  auto s = load_scene(o.scene, catalog.get());
  auto settings = resolve_settings(o, config);
  auto plan = capture_plan{};
  plan.scene_seeds = {s.seed};
  plan.cameras_per_scene = static_cast<uint32_t>(std::max(o.camera + 1, 1));
  plan.passes = config.passes;
  plan.settings = settings;
  plan.output_root = o.out;
  plan.config = config;
  if (o.camera < 0 || o.camera >= static_cast<int>(s.cameras.size()))
    throw render_error("camera index " + std::to_string(o.camera) + " out of range");
  auto spec = frame_spec{s.seed, static_cast<uint32_t>(o.camera), 0, light_angle_tag(0), ""};
  spec.frame_id = make_frame_id(spec.scene_seed, spec.camera, spec.tag);
  ensure_dir(o.out);
  capture_frame(plan, *catalog, s, spec, resolve_exec(o, config).threads);
  return 0;
}

int cmd_ablate(const options& o) {
  auto s = load_scene(o.scene);
  auto delta = load_delta(o.delta);
  save_scene(apply_delta(s, delta), o.out);
  if (!o.settings_out.empty()) {
    auto config = load_config(o);
    write_file_atomic(o.settings_out, serialize_settings(apply_render_override(config.render, delta)));
  }
  return 0;
}

int cmd_capture(const options& o) {
  auto plan = load_plan(o.plan);
  if (o.dry_run) {
    auto frames = plan_frames(plan);
    std::printf("%zu frames (%zu scenes x %u cameras x %zu angles)\n", frames.size(),
        plan.scene_seeds.size(), plan.cameras_per_scene, plan.light_angles_deg.size());
    return 0;
  }
  auto catalog = open_catalog(plan.config);
  auto workers = o.workers.value_or(plan.config.workers);
  auto report = execution_report{};
  auto m = execute_plan(plan, *catalog, workers, &report);
  std::fprintf(stderr, "rendered %zu, skipped %zu, failed %zu\n", report.rendered, report.skipped,
      report.failed);
  for (auto& [id, message] : m.errors) std::fprintf(stderr, "%s: %s\n", id.c_str(), message.c_str());
  return m.errors.empty() ? 0 : 2;
}

int cmd_verify(const options& o) {
  auto problems = verify_dataset(o.root);
  for (auto& p : problems) std::fprintf(stderr, "%s\n", p.c_str());
  if (problems.empty()) std::fprintf(stderr, "ok\n");
  return problems.empty() ? 0 : 2;
}

int cmd_eval(const options& o) {
  auto r = evaluate_dataset(o.pred, o.gt, parse_aggregation_mode(o.mode));
  auto text = format_report(r);
  if (o.report.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_file_atomic(o.report, text);
  }
  for (auto& m : r.missing_predictions) std::fprintf(stderr, "missing prediction: %s\n", m.c_str());
  return 0;
}

int cmd_inspect(const options& o) {
  auto r = inspect_frame(o.frame);
  std::fputs(r.summary.c_str(), stdout);
  for (auto& p : r.problems) std::fprintf(stderr, "%s\n", p.c_str());
  return r.problems.empty() ? 0 : 2;
}

int cmd_assets(const options& o) {
  auto config = load_config(o);
  auto catalog = open_catalog(config);
  if (!o.export_dir.empty()) {
    ensure_dir(o.export_dir);
    save_catalog(*catalog, o.export_dir);
  }
  if (o.list || o.export_dir.empty()) {
    auto print = [](const char* kind, const std::vector<std::string>& keys) {
      for (auto& k : keys) std::printf("%s\t%s\n", kind, k.c_str());
    };
    print("mesh", catalog->mesh_keys());
    print("texture", catalog->texture_keys());
    print("environment", catalog->environment_keys());
    print("backdrop", catalog->backdrop_keys());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto o = options{};
  auto app = CLI::App{"Synthetic transparent-object dataset toolkit", "clearsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(generator_version));

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "tool configuration file")->check(CLI::ExistingFile);
  };
  auto add_render_flags = [&](CLI::App* sub) {
    sub->add_option("--spp", o.spp, "samples per pixel");
    sub->add_option("--seed", o.frame_seed, "frame seed");
    sub->add_option("--caustics", o.caustics, "photon-mapped caustics")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--threads", o.threads, "render threads (0: all cores)");
  };

  auto generate = app.add_subcommand("generate", "generate scene files");
  add_config(generate);
  generate->add_option("--seed", o.seed, "first scene seed")->required();
  generate->add_option("--count", o.count, "number of consecutive seeds");
  generate->add_option("--out", o.out, "output directory")->required();

  auto render = app.add_subcommand("render", "render one camera of a scene");
  add_config(render);
  render->add_option("--scene", o.scene, "scene file")->required();
  render->add_option("--camera", o.camera, "camera index");
  add_render_flags(render);
  render->add_option("--out", o.out, "output directory")->required();

  auto gt = app.add_subcommand("gt", "render one frame with every configured ground-truth pass");
  add_config(gt);
  gt->add_option("--scene", o.scene, "scene file")->required();
  gt->add_option("--camera", o.camera, "camera index");
  add_render_flags(gt);
  gt->add_option("--out", o.out, "output directory")->required();

  auto ablate = app.add_subcommand("ablate", "apply an ablation delta to a scene");
  add_config(ablate);
  ablate->add_option("--scene", o.scene, "scene file")->required();
  ablate->add_option("--delta", o.delta, "delta file")->required();
  ablate->add_option("--out", o.out, "derived scene file")->required();
  ablate->add_option("--settings-out", o.settings_out, "write the overridden render settings here");

  auto capture = app.add_subcommand("capture", "execute a capture plan");
  capture->add_option("--plan", o.plan, "plan file")->required();
  capture->add_flag("--dry-run", o.dry_run, "report the frame count only");
  capture->add_option("--workers", o.workers, "concurrent frames")->check(CLI::PositiveNumber);

  auto verify = app.add_subcommand("verify", "check a dataset against its manifest");
  verify->add_option("--root", o.root, "dataset root")->required();

  auto eval = app.add_subcommand("eval", "score predicted masks against ground truth");
  eval->add_option("--pred", o.pred, "prediction directory")->required();
  eval->add_option("--gt", o.gt, "ground-truth directory")->required();
  eval->add_option("--mode", o.mode, "mean or pooled")->check(CLI::IsMember({"mean", "pooled"}));
  eval->add_option("--report", o.report, "report file (stdout when omitted)");

  auto inspect = app.add_subcommand("inspect", "summarize a frame directory");
  inspect->add_option("frame", o.frame, "frame directory")->required();

  auto assets = app.add_subcommand("assets", "list or export the asset catalog");
  add_config(assets);
  assets->add_flag("--list", o.list, "list catalog keys");
  assets->add_option("--export", o.export_dir, "write the catalog to a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*generate) return cmd_generate(o);
    if (*render) return cmd_render(o);
    if (*gt) return cmd_gt(o);
    if (*ablate) return cmd_ablate(o);
    if (*capture) return cmd_capture(o);
    if (*verify) return cmd_verify(o);
    if (*eval) return cmd_eval(o);
    if (*inspect) return cmd_inspect(o);
    if (*assets) return cmd_assets(o);
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
