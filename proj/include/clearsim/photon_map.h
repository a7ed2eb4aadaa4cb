//
// Caustic photon storage: a left-balanced kd-tree over deposit positions with
// fixed-radius queries. Query order depends only on the stored photons, so
// gathers are deterministic.
//

#ifndef CLEARSIM_PHOTON_MAP_H_
#define CLEARSIM_PHOTON_MAP_H_

#include <cstdint>
#include <vector>

#include "clearsim/math.h"

namespace clearsim {

struct photon {
  vec3 position;
  vec3 direction;  // propagation direction at the deposit
  vec3 normal;     // surface normal at the deposit
  vec3 power;      // linear RGB flux
  int8_t band = -1;  // locked dispersion band, -1 when never split
  uint8_t specular_bounces = 0;
};

class photon_map {
 public:
  photon_map() = default;
  explicit photon_map(std::vector<photon> photons);

  bool empty() const { return photons_.empty(); }
  size_t size() const { return photons_.size(); }
  // In tree order.
  const std::vector<photon>& photons() const { return photons_; }

  // Calls visit(photon) for every photon within `radius` of `p`.
  template <typename Visit>
  void for_each_within(const vec3& p, double radius, Visit&& visit) const {
    if (!photons_.empty()) query(0, p, radius * radius, visit);
  }

  vec3 total_power() const;

 private:
  void build(std::vector<photon>& source, size_t begin, size_t end, size_t node);

  template <typename Visit>
  void query(size_t node, const vec3& p, double r2, Visit& visit) const {
    if (node >= photons_.size()) return;
    auto& ph = photons_[node];
    auto axis = axes_[node];
    auto d = p[axis] - ph.position[axis];
    auto near = 2 * node + (d < 0 ? 1 : 2);
    auto far = 2 * node + (d < 0 ? 2 : 1);
    query(near, p, r2, visit);
    if (length_squared(ph.position - p) <= r2) visit(ph);
    if (d * d <= r2) query(far, p, r2, visit);
  }

  std::vector<photon> photons_;
  std::vector<uint8_t> axes_;
};

}  // namespace clearsim

#endif
