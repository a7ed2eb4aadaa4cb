//
// Dielectric interface optics: Snell refraction, unpolarized Fresnel
// reflectance and the GGX microfacet terms used for rough glass.
//

#ifndef CLEARSIM_OPTICS_H_
#define CLEARSIM_OPTICS_H_

#include <optional>

#include "clearsim/math.h"

namespace clearsim {

// `normal` faces the incident side (dot(dir_in, normal) < 0); eta_ratio is
// n_incident / n_transmitted. Empty under total internal reflection.
std::optional<vec3> refract(const vec3& dir_in, const vec3& normal, double eta_ratio);

// Mirror `dir_in` about `normal`.
inline vec3 reflect(const vec3& dir_in, const vec3& normal) {
  return dir_in - 2 * dot(dir_in, normal) * normal;
}

// Average of the s and p reflectances; 1 under total internal reflection.
double fresnel_reflectance(double cos_theta_i, double n1, double n2);

// GGX with alpha = roughness^2. Angles are relative to the macro normal.
double ggx_alpha(double roughness);
double ggx_d(double cos_theta_m, double alpha);
double ggx_g1(double cos_theta_v, double alpha);
// Microfacet normal drawn proportional to D(m) (m . n), in the frame of `n`.
vec3 ggx_sample_normal(const vec3& n, double alpha, double u1, double u2);

}  // namespace clearsim

#endif
