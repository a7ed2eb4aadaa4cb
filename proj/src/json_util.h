// Internal helpers for the structured-text (JSON) file formats.

#ifndef CLEARSIM_SRC_JSON_UTIL_H_
#define CLEARSIM_SRC_JSON_UTIL_H_

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "clearsim/error.h"
#include "clearsim/math.h"
#include "clearsim/render.h"
#include "clearsim/scene.h"
#include "json.hpp"

namespace clearsim {

using json = nlohmann::json;

json parse_json_text(const std::string& text, const std::string& what);

// Canonical text: keys sorted (std::map ordering), two-space indent,
// trailing newline.
std::string dump_canonical(const json& j);

// Typed access into a JSON object with error messages naming the field path.
class json_reader {
 public:
  json_reader(const json& node, std::string path);

  const std::string& path() const { return path_; }
  const json& node() const { return node_; }
  bool has(const char* key) const { return node_.contains(key); }
  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  // Rejects keys outside `known` with a validation_error naming the key.
  void allow_only(std::initializer_list<const char*> known) const;

  json_reader child(const char* key) const;
  std::vector<json_reader> array(const char* key) const;

  double number(const char* key) const;
  double number(const char* key, double fallback) const;
  uint64_t uint(const char* key) const;
  uint64_t uint(const char* key, uint64_t fallback) const;
  int integer(const char* key) const;
  int integer(const char* key, int fallback) const;
  bool boolean(const char* key, bool fallback) const;
  std::string string(const char* key) const;
  std::string string(const char* key, const std::string& fallback) const;
  vec3 vector3(const char* key) const;
  vec3 vector3(const char* key, const vec3& fallback) const;
  std::vector<double> numbers(const char* key) const;
  std::vector<std::string> strings(const char* key) const;

 private:
  const json& get(const char* key) const;
  const json& node_;
  std::string path_;
};

json to_json(const vec3& v);
json to_json(const quat& q);
json to_json(const rigid_transform& t);
rigid_transform read_transform(const json_reader& r);

json to_json(const glass_material& g);
json to_json(const diffuse_material& d);
json to_json(const material_ref& m);
glass_material read_glass(const json_reader& r);
diffuse_material read_diffuse(const json_reader& r);
material_ref read_material(const json_reader& r);

json to_json(const area_light& l);
area_light read_light(const json_reader& r);
json to_json(const camera& c);
camera read_camera(const json_reader& r);

json settings_to_json(const render_settings& s);
// Missing keys keep the value from `defaults`.
render_settings read_settings(const json_reader& r, const render_settings& defaults);

}  // namespace clearsim

#endif
