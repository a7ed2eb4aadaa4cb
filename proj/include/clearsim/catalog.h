//
// Asset catalog: named meshes, textures, environment maps and backdrops, plus
// the HDRI and backdrop banks scene generation draws from. On disk it is a
// directory with `catalog.json`, OBJ meshes and PFM images.
//

#ifndef CLEARSIM_CATALOG_H_
#define CLEARSIM_CATALOG_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "clearsim/hull.h"
#include "clearsim/image.h"
#include "clearsim/mesh.h"
#include "clearsim/scene.h"

namespace clearsim {

struct backdrop_asset {
  std::string mesh;
  diffuse_material material;
};

class asset_catalog {
 public:
  asset_catalog();

  void add_mesh(const std::string& key, mesh m);
  void add_texture(const std::string& key, image<rgb32f> texels);
  // Equirectangular, linear RGB; a 1x1 image is a constant environment.
  void add_environment(const std::string& key, image<rgb32f> texels);
  void add_backdrop(const std::string& key, backdrop_asset backdrop);

  bool has_mesh(const std::string& key) const { return meshes_.count(key) > 0; }
  bool has_texture(const std::string& key) const { return textures_.count(key) > 0; }
  bool has_environment(const std::string& key) const { return environments_.count(key) > 0; }
  bool has_backdrop(const std::string& key) const { return backdrops_.count(key) > 0; }

  // Throw asset_error for unknown keys.
  const mesh& get_mesh(const std::string& key) const;
  const image<rgb32f>& get_texture(const std::string& key) const;
  const image<rgb32f>& get_environment(const std::string& key) const;
  const backdrop_asset& get_backdrop(const std::string& key) const;

  // Cached; safe to call concurrently.
  const settle_shape& get_settle_shape(const std::string& mesh_key) const;

  std::vector<std::string> mesh_keys() const;
  std::vector<std::string> texture_keys() const;
  std::vector<std::string> environment_keys() const;
  std::vector<std::string> backdrop_keys() const;

  std::vector<std::string> hdri_bank;
  std::vector<std::string> backdrop_bank;

 private:
  std::map<std::string, std::shared_ptr<const mesh>> meshes_;
  std::map<std::string, std::shared_ptr<const image<rgb32f>>> textures_;
  std::map<std::string, std::shared_ptr<const image<rgb32f>>> environments_;
  std::map<std::string, backdrop_asset> backdrops_;

  struct settle_cache {
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<const settle_shape>> shapes;
  };
  std::shared_ptr<settle_cache> settle_cache_;
};

asset_catalog load_catalog(const std::filesystem::path& root);
void save_catalog(const asset_catalog& catalog, const std::filesystem::path& root);

// Procedural default assets: glassware meshes, props, backdrop geometry,
// `hdri_count` sky maps and `backdrop_count` backdrop materials.
asset_catalog make_default_catalog(int hdri_count = 33, int backdrop_count = 33);

// CLEARSIM_ASSET_ROOT when set, otherwise `configured`.
std::filesystem::path resolve_asset_root(const std::filesystem::path& configured);

}  // namespace clearsim

#endif
