#include "clearsim/optics.h"

namespace clearsim {

std::optional<vec3> refract(const vec3& dir_in, const vec3& normal, double eta_ratio) {
  auto cos_i = -dot(dir_in, normal);
  auto sin2_t = eta_ratio * eta_ratio * std::max(0.0, 1 - cos_i * cos_i);
  if (sin2_t > 1) return std::nullopt;
  auto cos_t = std::sqrt(1 - sin2_t);
  return normalize(eta_ratio * dir_in + (eta_ratio * cos_i - cos_t) * normal);
}

double fresnel_reflectance(double cos_theta_i, double n1, double n2) {
  cos_theta_i = std::clamp(cos_theta_i, 0.0, 1.0);
  auto sin2_t = (n1 / n2) * (n1 / n2) * (1 - cos_theta_i * cos_theta_i);
  if (sin2_t >= 1) return 1;
  auto cos_t = std::sqrt(1 - sin2_t);
  auto rs = (n1 * cos_theta_i - n2 * cos_t) / (n1 * cos_theta_i + n2 * cos_t);
  auto rp = (n2 * cos_theta_i - n1 * cos_t) / (n2 * cos_theta_i + n1 * cos_t);
  return std::clamp((rs * rs + rp * rp) / 2, 0.0, 1.0);
}

double ggx_alpha(double roughness) { return std::max(roughness * roughness, 1e-4); }

double ggx_d(double cos_theta_m, double alpha) {
  if (cos_theta_m <= 0) return 0;
  auto c2 = cos_theta_m * cos_theta_m;
  auto tan2 = (1 - c2) / c2;
  auto a2 = alpha * alpha;
  auto root = a2 + tan2;
  return a2 / (pi * c2 * c2 * root * root);
}

double ggx_g1(double cos_theta_v, double alpha) {
  auto c = std::abs(cos_theta_v);
  if (c >= 1) return 1;
  auto tan2 = (1 - c * c) / (c * c);
  return 2 / (1 + std::sqrt(1 + alpha * alpha * tan2));
}

vec3 ggx_sample_normal(const vec3& n, double alpha, double u1, double u2) {
  auto tan2 = alpha * alpha * u1 / std::max(1 - u1, 1e-12);
  auto cos_t = 1 / std::sqrt(1 + tan2);
  auto sin_t = std::sqrt(std::max(0.0, 1 - cos_t * cos_t));
  auto phi = 2 * pi * u2;
  auto f = basis_from_normal(n);
  return normalize(f.to_world({sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t}));
}

}  // namespace clearsim
