#include <cmath>

#include "clearsim/error.h"
#include "clearsim/groundtruth.h"
#include "clearsim/render.h"
#include "doctest.h"
#include "fixtures.h"

using namespace clearsim;
using fixtures::test_catalog;

namespace {

gbuffer gbuffer_of(const scene& s, int camera = 0) {
  auto ctx = render_context(s, test_catalog());
  return render_gbuffer(ctx, camera);
}

gbuffer synthetic(int w, int h) {
  auto g = gbuffer{};
  g.texels = image<gbuffer_texel>(w, h);
  return g;
}

image<uint32_t> half_plane(int w, int h, int split) {
  auto m = image<uint32_t>(w, h);
  for (int y = 0; y < h; y++)
    for (int x = split; x < w; x++) m(x, y) = 1;
  return m;
}

int count_set(const image<uint8_t>& img) {
  auto n = 0;
  for (auto v : img.pixels) n += v != 0;
  return n;
}

// Sphere on the ground, viewed at `elevation` with the sphere filling a good
// part of the frame.
struct sphere_view {
  scene s;
  vec3 center;
  double radius;
};

sphere_view resting_sphere(double elevation, double hover = 0, int size = 96) {
  auto radius = 0.1;
  auto center = vec3{0, 0, radius + hover};
  auto s = fixtures::empty_scene("grey");
  s.objects.push_back(fixtures::sphere_at(1, center, radius, fixtures::clear_glass()));
  s.cameras.push_back(fixtures::orbit_camera(center, 0.8, elevation, size, size, 0.4));
  return {s, center, radius};
}

}  // namespace

TEST_CASE("depth normalization examples") {
  auto g = synthetic(3, 1);
  g.texels.pixels[0].depth_m = 2.5;
  g.texels.pixels[0].object_id = 1;
  g.texels.pixels[1].object_id = 0;  // miss
  g.texels.pixels[2].depth_m = 15;
  g.texels.pixels[2].object_id = 1;
  auto d = depth_pass(g, 10);
  CHECK(d.pixels[0] == doctest::Approx(0.25));
  CHECK(d.pixels[1] == 1.0f);
  CHECK(d.pixels[2] == 1.0f);
}

TEST_CASE("normal encoding examples") {
  auto e = encode_normal({0, 0, 1});
  CHECK(e.x == 0.5);
  CHECK(e.y == 0.5);
  CHECK(e.z == 1.0);
  auto f = encode_normal({-1, 0, 0});
  CHECK(f.x == 0.0);
  auto n = normalize(vec3{0.3, -0.4, 0.5});
  CHECK(length(decode_normal(encode_normal(n)) - n) < 1e-15);
}

TEST_CASE("world and camera normals agree for an identity camera pose") {
  auto s = resting_sphere(0.5).s;
  s.cameras[0].pose.rotation = {1, 0, 0, 0};
  s.cameras[0].pose.translation = {0, 0, 1.5};
  auto g = gbuffer_of(s);
  auto world = normals_world_pass(g);
  auto cam = normals_camera_pass(g, s.cameras[0]);
  for (size_t i = 0; i < world.size(); i++)
    CHECK(length(to_vec3(world.pixels[i]) - to_vec3(cam.pixels[i])) < 1e-6);
}

TEST_CASE("camera normals face the camera") {
  auto v = resting_sphere(0.5);
  auto g = gbuffer_of(v.s);
  auto cam = normals_camera_pass(g, v.s.cameras[0]);
  for (size_t i = 0; i < cam.size(); i++) {
    if (g.texels.pixels[i].object_id == 0) continue;
    CHECK(decode_normal(to_vec3(cam.pixels[i])).z > -1e-3);
  }
}

TEST_CASE("mask filters by class and matches the analytic disc") {
  auto v = resting_sphere(0.6, 0, 64);
  v.s.props.push_back(fixtures::sphere_at(
      5, {0.25, 0.15, 0.05}, 0.05, diffuse_material{}, semantic_class::prop));
  auto g = gbuffer_of(v.s);

  auto all = mask_pass(g, class_filter::all());
  auto transparent = mask_pass(g, class_filter::transparent());
  auto props = mask_pass(g, class_filter::only(semantic_class::prop));
  auto analytic = image<uint8_t>(64, 64);
  int seen_backdrop = 0, seen_prop = 0, inside = 0;
  for (int y = 0; y < 64; y++) {
    for (int x = 0; x < 64; x++) {
      auto id = all(x, y);
      CHECK(id == g.texels(x, y).object_id);
      seen_backdrop += id == 100;
      seen_prop += id == 5;
      CHECK((transparent(x, y) == 1) == (id == 1));
      CHECK((props(x, y) == 5) == (id == 5));
      auto r = camera_ray(v.s.cameras[0], x + 0.5, y + 0.5);
      analytic(x, y) = fixtures::ray_sphere(r, v.center, v.radius).has_value();
      inside += analytic(x, y);
    }
  }
  CHECK(seen_backdrop > 0);
  CHECK(seen_prop > 0);
  CHECK(inside > 100);
  // the tessellated sphere may differ from the analytic disc only within a
  // pixel of its silhouette
  auto edges = label_transitions([&] {
    auto m = image<uint32_t>(64, 64);
    for (size_t i = 0; i < m.size(); i++) m.pixels[i] = analytic.pixels[i];
    return m;
  }());
  auto disagreements = 0;
  for (int y = 0; y < 64; y++) {
    for (int x = 0; x < 64; x++) {
      if ((transparent(x, y) == 1) == (analytic(x, y) == 1)) continue;
      disagreements++;
      auto near_edge = false;
      for (int dy = -1; dy <= 1; dy++)
        for (int dx = -1; dx <= 1; dx++) {
          auto u = x + dx, w = y + dy;
          if (u >= 0 && w >= 0 && u < 64 && w < 64) near_edge = near_edge || edges(u, w);
        }
      CHECK(near_edge);
    }
  }
  CHECK(disagreements <= inside / 50);

  auto without = v.s;
  without.objects.clear();
  auto none = mask_pass(gbuffer_of(without), class_filter::transparent());
  for (auto id : none.pixels) CHECK(id == 0);
}

TEST_CASE("class filter names") {
  CHECK(parse_class_filter("all").bits == class_filter::all().bits);
  CHECK(parse_class_filter("transparent").passes(semantic_class::transparent));
  CHECK_FALSE(parse_class_filter("transparent").passes(semantic_class::prop));
  CHECK_THROWS_AS(parse_class_filter("glass"), validation_error);
}

TEST_CASE("mask ids above 16 bits are rejected") {
  auto m = image<uint32_t>(1, 1, 70000);
  CHECK_THROWS_AS(mask_to_u16(m), domain_error);
  m.pixels[0] = 65535;
  CHECK(mask_to_u16(m).pixels[0] == 65535);
}

TEST_CASE("outline of a half-plane") {
  auto m = half_plane(8, 8, 4);
  auto one = outline_pass(m, 1);
  for (int y = 0; y < 8; y++)
    for (int x = 0; x < 8; x++) CHECK(one(x, y) == ((x == 3 || x == 4) ? 1 : 0));

  auto wide = outline_pass(half_plane(64, 8, 32), 20);
  for (int y = 0; y < 8; y++)
    for (int x = 0; x < 64; x++) CHECK(wide(x, y) == ((x >= 31 - 9 && x <= 32 + 9) ? 1 : 0));
  CHECK(count_set(wide) == 20 * 8);
}

TEST_CASE("outline of a uniform mask is empty and thickness zero is an error") {
  CHECK(count_set(outline_pass(image<uint32_t>(10, 10, 3), 5)) == 0);
  CHECK_THROWS_AS(outline_pass(half_plane(4, 4, 2), 0), domain_error);
}

TEST_CASE("outline grows monotonically with thickness and matches a brute-force dilation") {
  auto m = image<uint32_t>(40, 30);
  for (int y = 0; y < 30; y++)
    for (int x = 0; x < 40; x++) m(x, y) = (std::hypot(x - 18.3, y - 13.7) < 9) ? 2 : ((x > 33) ? 4 : 0);
  auto edges = label_transitions(m);
  auto previous = outline_pass(m, 1);
  for (uint32_t t = 1; t <= 12; t++) {
    auto o = outline_pass(m, t);
    auto r = static_cast<int>((t + 1) / 2) - 1;
    for (int y = 0; y < 30; y++) {
      for (int x = 0; x < 40; x++) {
        auto expected = 0;
        for (int v = std::max(0, y - r); v <= std::min(29, y + r); v++)
          for (int u = std::max(0, x - r); u <= std::min(39, x + r); u++) expected |= edges(u, v);
        CHECK(o(x, y) == expected);
        CHECK(o(x, y) >= previous(x, y));
      }
    }
    previous = o;
  }
}

TEST_CASE("plane alone has no boundaries") {
  auto s = fixtures::empty_scene("grey");
  s.cameras.push_back(fixtures::orbit_camera({0, 0, 0}, 1, 0.5, 32, 32, 0.5));
  auto g = gbuffer_of(s);
  auto b = boundary_pass(g, mask_pass(g, class_filter::all()), 0.005);
  for (auto l : b.pixels) CHECK(l == boundary_label::none);
}

TEST_CASE("a floating sphere has only occlusion edges") {
  auto v = resting_sphere(0.5, 0.05);
  auto g = gbuffer_of(v.s);
  auto b = boundary_pass(g, mask_pass(g, class_filter::all()), 0.005);
  int occlusion = 0;
  for (auto l : b.pixels) {
    CHECK(l != boundary_label::contact_edge);
    occlusion += l == boundary_label::occlusion_edge;
  }
  CHECK(occlusion > 50);
}

TEST_CASE("a resting sphere has a contact arc at the bottom and occlusion above") {
  // At 30 degrees elevation the silhouette gap to the plane behind is about
  // R tan(15 deg) at the bottom and R cot(15 deg) at the top.
  auto v = resting_sphere(pi / 6);
  auto g = gbuffer_of(v.s);
  auto b = boundary_pass(g, mask_pass(g, class_filter::all()), 0.1);
  auto cx = 0.0, cy = 0.0, n = 0.0;
  for (int y = 0; y < 96; y++)
    for (int x = 0; x < 96; x++)
      if (g.texels(x, y).object_id == 1) cx += x, cy += y, n++;
  cx /= n, cy /= n;
  int bottom_contact = 0, bottom_total = 0, top_occlusion = 0, top_total = 0;
  for (int y = 0; y < 96; y++) {
    for (int x = 0; x < 96; x++) {
      if (g.texels(x, y).object_id != 1 || b(x, y) == boundary_label::none) continue;
      auto angle = std::atan2(y - cy, x - cx);  // image y points down
      auto from_down = std::abs(angle - pi / 2);
      auto from_up = std::abs(angle + pi / 2);
      if (from_down <= pi / 6) {
        bottom_total++;
        bottom_contact += b(x, y) == boundary_label::contact_edge;
      }
      if (from_up <= pi / 4) {
        top_total++;
        top_occlusion += b(x, y) == boundary_label::occlusion_edge;
      }
    }
  }
  CHECK(bottom_total > 3);
  CHECK(bottom_contact == bottom_total);
  CHECK(top_total > 3);
  CHECK(top_occlusion == top_total);
}

TEST_CASE("boundary encodings") {
  auto b = image<boundary_label>(3, 1);
  b.pixels = {boundary_label::none, boundary_label::contact_edge, boundary_label::occlusion_edge};
  auto e = encode_boundary(b);
  CHECK(e.pixels == std::vector<uint8_t>{0, 128, 255});
  auto c = image<caustic_label>(3, 1);
  c.pixels = {caustic_label::none, caustic_label::local, caustic_label::non_local};
  CHECK(encode_caustics(c).pixels == std::vector<uint8_t>{0, 128, 255});
}

TEST_CASE("depth and normals match the analytic sphere") {
  auto v = resting_sphere(0.6, 0, 128);
  auto g = gbuffer_of(v.s);
  auto cam = v.s.cameras[0];
  auto forward = camera_forward(cam);
  auto depth = depth_pass(g, v.s.depth_range_m);
  auto normals = normals_world_pass(g);
  double depth_err = 0, depth_norm_err = 0, normal_err = 0;
  int n = 0;
  for (int y = 0; y < 128; y++) {
    for (int x = 0; x < 128; x++) {
      auto r = camera_ray(cam, x + 0.5, y + 0.5);
      auto t = fixtures::ray_sphere(r, v.center, v.radius);
      if (!t || g.texels(x, y).object_id != 1) continue;
      auto p = r.origin + *t * r.direction;
      auto planar = *t * dot(r.direction, forward);
      depth_err += std::pow(g.texels(x, y).depth_m - planar, 2);
      depth_norm_err += std::pow(depth(x, y) - planar / v.s.depth_range_m, 2);
      auto expected = encode_normal(normalize(p - v.center));
      normal_err += length_squared(to_vec3(normals(x, y)) - expected) / 3;
      n++;
    }
  }
  REQUIRE(n > 1000);
  CHECK(std::sqrt(depth_err / n) < 1e-3);
  CHECK(std::sqrt(depth_norm_err / n) < 1e-3);
  CHECK(std::sqrt(normal_err / n) < 1e-3);
}

TEST_CASE("caustic labels") {
  auto on = radiance_image{};
  on.texels = image<rgb32f>(3, 1);
  on.pair_hash = 9;
  auto off = on;
  on.texels.pixels = {{0.5f, 0.5f, 0.5f}, {0.5f, 0.5f, 0.5f}, {0.1f, 0.1f, 0.1f}};
  off.texels.pixels = {{0.1f, 0.1f, 0.1f}, {0.1f, 0.1f, 0.1f}, {0.1f, 0.1f, 0.1f}};
  auto g = synthetic(3, 1);
  g.texels.pixels[0].is_transparent_hit = true;
  g.texels.pixels[0].object_id = 1;
  g.texels.pixels[1].object_id = 2;
  auto c = caustics_pass(on, off, g, 0.01);
  CHECK(c.pixels[0] == caustic_label::local);
  CHECK(c.pixels[1] == caustic_label::non_local);
  CHECK(c.pixels[2] == caustic_label::none);

  for (auto l : caustics_pass(on, off, g, infinity).pixels) CHECK(l == caustic_label::none);

  auto bad = off;
  bad.pair_hash = 10;
  CHECK_THROWS_AS(caustics_pass(on, bad, g, 0.01), validation_error);
  bad = off;
  bad.texels = image<rgb32f>(2, 1);
  CHECK_THROWS_AS(caustics_pass(on, bad, g, 0.01), domain_error);
}

TEST_CASE("rendered caustic labels shrink with tau and vanish without glass") {
  auto setup = fixtures::ball_lens_scene(0.005, 0.35, 0.1, 1.0, 100, 48);
  auto settings = render_settings{};
  settings.samples_per_pixel = 4;
  settings.photon_count = 30000;
  settings.photon_gather_radius_m = 0.02;
  auto ctx = render_context(setup.s, test_catalog());
  auto on = render_frame(ctx, 0, settings);
  settings.caustics_enabled = false;
  auto off = render_frame(ctx, 0, settings);

  auto count = [&](double tau) {
    auto n = 0;
    for (auto l : caustics_pass(on.radiance, off.radiance, on.gbuf, tau).pixels) n += l != caustic_label::none;
    return n;
  };
  auto previous = count(1e-4);
  CHECK(previous > 0);
  for (double tau : {1e-3, 1e-2, 1e-1, 1.0}) {
    auto n = count(tau);
    CHECK(n <= previous);
    previous = n;
  }

  auto plain = setup.s;
  plain.objects.clear();
  auto ctx2 = render_context(plain, test_catalog());
  settings.caustics_enabled = true;
  auto on2 = render_frame(ctx2, 0, settings);
  settings.caustics_enabled = false;
  auto off2 = render_frame(ctx2, 0, settings);
  for (auto l : caustics_pass(on2.radiance, off2.radiance, on2.gbuf, 1e-6).pixels) CHECK(l == caustic_label::none);
}
