//
// Convex hulls and the resting poses derived from them. A rigid body on a
// plane rests on a hull facet whose polygon contains the projection of the
// center of mass; those facets become the settle orientations.
//

#ifndef CLEARSIM_HULL_H_
#define CLEARSIM_HULL_H_

#include <array>
#include <span>
#include <vector>

#include "clearsim/math.h"
#include "clearsim/mesh.h"

namespace clearsim {

struct convex_hull {
  std::vector<vec3> points;
  std::vector<std::array<uint32_t, 3>> faces;  // counter-clockwise seen from outside
};

// Incremental hull. Throws domain_error for fewer than four non-coplanar
// points.
convex_hull compute_convex_hull(std::span<const vec3> points);

struct rest_pose {
  quat orientation;    // maps the facet normal onto -z
  double rest_height;  // z translation putting the lowest vertex on z = 0 (unit scale)
  double facet_area;
};

// Stable resting poses of a mesh at unit scale, most stable (largest facet)
// first, at most `max_poses`. The pivot is the mesh origin.
struct settle_shape {
  double bounding_radius = 0;  // max vertex distance from the origin
  std::vector<rest_pose> poses;
};

settle_shape compute_settle_shape(const mesh& m, size_t max_poses = 24);

}  // namespace clearsim

#endif
