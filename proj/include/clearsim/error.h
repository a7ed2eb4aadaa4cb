#ifndef CLEARSIM_ERROR_H_
#define CLEARSIM_ERROR_H_

#include <stdexcept>
#include <string>

namespace clearsim {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (scene, delta, config, plan files).
struct parse_error : error {
  using error::error;
};

// A type invariant is violated; `field` names the offending path.
struct validation_error : error {
  validation_error(const std::string& field, const std::string& what)
      : error(field + ": " + what), field(field) {}
  std::string field;
};

// Referenced asset not present in the catalog.
struct asset_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

// Numeric argument outside the domain of a function.
struct domain_error : error {
  using error::error;
};

// Rejection sampling could not place every requested object.
struct placement_error : error {
  using error::error;
};

struct render_error : error {
  using error::error;
};

}  // namespace clearsim

#endif
