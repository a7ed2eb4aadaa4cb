//
// Small geometry library: vectors, quaternions, rigid transforms, rays and
// bounding boxes. Everything is double precision; scenes are in meters.
//

#ifndef CLEARSIM_MATH_H_
#define CLEARSIM_MATH_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace clearsim {

inline constexpr double pi = std::numbers::pi;
inline constexpr double inv_pi = 1.0 / std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

// -----------------------------------------------------------------------------
// VECTORS
// -----------------------------------------------------------------------------

struct vec2 {
  double x = 0, y = 0;
  friend bool operator==(const vec2&, const vec2&) = default;
};

struct vec3 {
  double x = 0, y = 0, z = 0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend bool operator==(const vec3&, const vec3&) = default;
};

inline vec3 operator-(const vec3& a) { return {-a.x, -a.y, -a.z}; }
inline vec3 operator+(const vec3& a, const vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline vec3 operator-(const vec3& a, const vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline vec3 operator*(const vec3& a, const vec3& b) {
  return {a.x * b.x, a.y * b.y, a.z * b.z};
}
inline vec3 operator*(const vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline vec3 operator*(double s, const vec3& a) { return {a.x * s, a.y * s, a.z * s}; }
inline vec3 operator/(const vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline vec3& operator+=(vec3& a, const vec3& b) { return a = a + b; }
inline vec3& operator-=(vec3& a, const vec3& b) { return a = a - b; }
inline vec3& operator*=(vec3& a, const vec3& b) { return a = a * b; }
inline vec3& operator*=(vec3& a, double s) { return a = a * s; }

inline double dot(const vec3& a, const vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline vec3 cross(const vec3& a, const vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_squared(const vec3& a) { return dot(a, a); }
inline double length(const vec3& a) { return std::sqrt(dot(a, a)); }
inline vec3 normalize(const vec3& a) {
  auto l = length(a);
  return l > 0 ? a / l : a;
}
inline vec3 min(const vec3& a, const vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline vec3 max(const vec3& a, const vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline double max_component(const vec3& a) { return std::max({a.x, a.y, a.z}); }
inline double sum(const vec3& a) { return a.x + a.y + a.z; }
inline bool isfinite(const vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
inline vec3 lerp(const vec3& a, const vec3& b, double t) { return a * (1 - t) + b * t; }

// Rec. 709 luminance of a linear RGB triple.
inline double luminance(const vec3& c) {
  return 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z;
}

// Orthonormal basis around a unit normal (Duff et al. 2017).
struct frame3 {
  vec3 x, y, z;
  vec3 to_world(const vec3& v) const { return x * v.x + y * v.y + z * v.z; }
  vec3 to_local(const vec3& v) const { return {dot(v, x), dot(v, y), dot(v, z)}; }
};

inline frame3 basis_from_normal(const vec3& n) {
  auto sign = std::copysign(1.0, n.z);
  auto a = -1.0 / (sign + n.z);
  auto b = n.x * n.y * a;
  return {{1 + sign * n.x * n.x * a, sign * b, -sign * n.x},
      {b, sign + n.y * n.y * a, -n.y}, n};
}

// -----------------------------------------------------------------------------
// QUATERNIONS AND RIGID TRANSFORMS
// -----------------------------------------------------------------------------

// Rotation quaternion, stored w-first.
struct quat {
  double w = 1, x = 0, y = 0, z = 0;
  friend bool operator==(const quat&, const quat&) = default;
};

inline quat operator*(const quat& a, const quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}
inline quat conjugate(const quat& q) { return {q.w, -q.x, -q.y, -q.z}; }
inline double norm(const quat& q) {
  return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}
inline quat normalize(const quat& q) {
  auto n = norm(q);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}
inline vec3 rotate(const quat& q, const vec3& v) {
  // v' = v + 2 w (u x v) + 2 u x (u x v)
  auto u = vec3{q.x, q.y, q.z};
  auto t = 2.0 * cross(u, v);
  return v + q.w * t + cross(u, t);
}
inline quat axis_angle(const vec3& axis, double angle) {
  auto a = normalize(axis);
  auto s = std::sin(angle / 2);
  return {std::cos(angle / 2), a.x * s, a.y * s, a.z * s};
}

// Shortest-arc rotation taking unit vector `from` onto unit vector `to`.
inline quat rotation_between(const vec3& from, const vec3& to) {
  auto c = dot(from, to);
  if (c < -1 + 1e-12) {
    // antiparallel: rotate by pi about any axis orthogonal to `from`
    auto axis = std::abs(from.x) < 0.9 ? cross(from, {1, 0, 0}) : cross(from, {0, 1, 0});
    return axis_angle(axis, pi);
  }
  auto a = cross(from, to);
  return normalize(quat{1 + c, a.x, a.y, a.z});
}

// Camera-style orientation: local -z looks along `forward`, local +y is as
// close to `up` as possible.
inline quat look_rotation(const vec3& forward, const vec3& up) {
  auto f = normalize(forward);
  auto r = normalize(cross(f, up));
  auto u = cross(r, f);
  // columns of the rotation matrix: r, u, -f
  double m00 = r.x, m01 = u.x, m02 = -f.x;
  double m10 = r.y, m11 = u.y, m12 = -f.y;
  double m20 = r.z, m21 = u.z, m22 = -f.z;
  auto trace = m00 + m11 + m22;
  quat q;
  if (trace > 0) {
    auto s = std::sqrt(trace + 1) * 2;
    q = {s / 4, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s};
  } else if (m00 > m11 && m00 > m22) {
    auto s = std::sqrt(1 + m00 - m11 - m22) * 2;
    q = {(m21 - m12) / s, s / 4, (m01 + m10) / s, (m02 + m20) / s};
  } else if (m11 > m22) {
    auto s = std::sqrt(1 + m11 - m00 - m22) * 2;
    q = {(m02 - m20) / s, (m01 + m10) / s, s / 4, (m12 + m21) / s};
  } else {
    auto s = std::sqrt(1 + m22 - m00 - m11) * 2;
    q = {(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, s / 4};
  }
  return normalize(q);
}

// world = translation + scale * rotation * local
struct rigid_transform {
  vec3 translation;
  quat rotation;
  double scale = 1;

  vec3 apply_point(const vec3& p) const {
    return translation + rotate(rotation, p * scale);
  }
  vec3 apply_vector(const vec3& v) const { return rotate(rotation, v); }
  vec3 inverse_vector(const vec3& v) const { return rotate(conjugate(rotation), v); }

  friend bool operator==(const rigid_transform&, const rigid_transform&) = default;
};

// -----------------------------------------------------------------------------
// RAYS AND BOXES
// -----------------------------------------------------------------------------

struct ray3 {
  vec3 origin;
  vec3 direction;
  double tmin = 0;
  double tmax = infinity;
};

struct bbox3 {
  vec3 min = {infinity, infinity, infinity};
  vec3 max = {-infinity, -infinity, -infinity};

  void expand(const vec3& p) {
    min = clearsim::min(min, p);
    max = clearsim::max(max, p);
  }
  void expand(const bbox3& b) {
    min = clearsim::min(min, b.min);
    max = clearsim::max(max, b.max);
  }
  vec3 center() const { return (min + max) * 0.5; }
  vec3 extent() const { return max - min; }
  bool empty() const { return min.x > max.x; }
  double surface_area() const {
    if (empty()) return 0;
    auto e = extent();
    return 2 * (e.x * e.y + e.y * e.z + e.z * e.x);
  }
  bool contains(const bbox3& b) const {
    return b.min.x >= min.x && b.min.y >= min.y && b.min.z >= min.z &&
           b.max.x <= max.x && b.max.y <= max.y && b.max.z <= max.z;
  }
};

}  // namespace clearsim

#endif
