#include <cmath>

#include "clearsim/error.h"
#include "clearsim/photon_map.h"
#include "clearsim/render.h"
#include "doctest.h"
#include "fixtures.h"

using namespace clearsim;
using fixtures::test_catalog;

namespace {

render_settings fast_settings() {
  auto s = render_settings{};
  s.samples_per_pixel = 4;
  s.max_bounces = 4;
  s.photon_count = 20000;
  s.frame_seed = 3;
  return s;
}

// Glass and diffuse spheres on the plane, one light, one camera.
scene glass_scene(int w = 40, int h = 30) {
  auto s = fixtures::empty_scene("grey");
  s.objects.push_back(fixtures::sphere_at(1, {0, 0, 0.1}, 0.1, fixtures::clear_glass(30)));
  s.props.push_back(fixtures::sphere_at(
      2, {0.25, 0.1, 0.08}, 0.08, diffuse_material{{0.7, 0.2, 0.2}, "", 1}, semantic_class::prop));
  s.lights.push_back(fixtures::point_light({0.2, -0.2, 1.2}, {0, 0, 0}, 4, 0.6, 0.02));
  s.cameras.push_back(make_look_at_camera({1.0, -0.6, 0.7}, {0.05, 0, 0.05}, w, h, 0.8));
  return s;
}

vec3 weighted_centroid(const photon_map& pm, double* second_moment = nullptr) {
  auto c = vec3{};
  auto w = 0.0;
  for (auto& p : pm.photons()) {
    c += p.position * sum(p.power);
    w += sum(p.power);
  }
  c = c / w;
  if (second_moment) {
    *second_moment = 0;
    for (auto& p : pm.photons()) *second_moment += length_squared(p.position - c) * sum(p.power) / w;
  }
  return c;
}

}  // namespace

TEST_CASE("render settings invariants") {
  auto s = render_settings{};
  s.samples_per_pixel = 0;
  CHECK_THROWS_AS(validate_settings(s), validation_error);
  s = {};
  s.photon_count = 0;
  CHECK_THROWS_AS(validate_settings(s), validation_error);
  s.caustics_enabled = false;
  CHECK_NOTHROW(validate_settings(s));
  s = {};
  s.photon_gather_radius_m = 0;
  CHECK_THROWS_AS(validate_settings(s), validation_error);
}

TEST_CASE("furnace: a white plane under a uniform environment renders the environment radiance") {
  auto s = fixtures::empty_scene("white");
  s.backdrop = fixtures::backdrop_plane(1, {1, 1, 1});
  s.cameras.push_back(make_look_at_camera({0, 0, 1}, {0, 0, 0}, 16, 16, 0.6, {0, 1, 0}));
  auto settings = render_settings{};
  settings.samples_per_pixel = 1024;
  settings.caustics_enabled = false;
  auto r = render_frame(s, test_catalog(), 0, settings);
  auto mean = 0.0;
  for (auto& t : r.radiance.texels.pixels) {
    CHECK(std::abs(t.g - 1.0) <= 0.02);
    mean += t.g / r.radiance.texels.size();
  }
  CHECK(std::abs(mean - 1.0) <= 0.005);
}

TEST_CASE("render output does not depend on tile size or thread count") {
  auto s = glass_scene();
  auto settings = fast_settings();
  auto a = render_frame(s, test_catalog(), 0, settings, {16, 1});
  auto b = render_frame(s, test_catalog(), 0, settings, {7, 3});
  auto c = render_frame(s, test_catalog(), 0, settings, {64, 0});
  CHECK(a.radiance.texels == b.radiance.texels);
  CHECK(a.radiance.texels == c.radiance.texels);
  CHECK(a.radiance.pair_hash == b.radiance.pair_hash);
}

TEST_CASE("the frame seed changes the noise") {
  auto s = glass_scene();
  auto settings = fast_settings();
  auto a = render_frame(s, test_catalog(), 0, settings);
  settings.frame_seed++;
  auto b = render_frame(s, test_catalog(), 0, settings);
  CHECK_FALSE(a.radiance.texels == b.radiance.texels);
}

TEST_CASE("caustics toggle is vacuous without glass") {
  auto s = glass_scene();
  s.objects.clear();
  auto settings = fast_settings();
  auto on = render_frame(s, test_catalog(), 0, settings);
  settings.caustics_enabled = false;
  auto off = render_frame(s, test_catalog(), 0, settings);
  CHECK(on.radiance.texels == off.radiance.texels);
  CHECK(on.radiance.pair_hash == off.radiance.pair_hash);
}

TEST_CASE("caustics only add the gather term") {
  auto s = glass_scene();
  auto settings = fast_settings();
  auto on = render_frame(s, test_catalog(), 0, settings);
  settings.caustics_enabled = false;
  auto off = render_frame(s, test_catalog(), 0, settings);
  auto added = 0.0;
  for (size_t i = 0; i < on.radiance.texels.size(); i++) {
    auto a = on.radiance.texels.pixels[i], b = off.radiance.texels.pixels[i];
    CHECK(a.r >= b.r);
    CHECK(a.g >= b.g);
    CHECK(a.b >= b.b);
    added += (a.r - b.r) + (a.g - b.g) + (a.b - b.b);
  }
  CHECK(added > 0);
  CHECK(on.radiance.pair_hash == off.radiance.pair_hash);
  CHECK(on.gbuf.texels.pixels.size() == off.gbuf.texels.pixels.size());
}

TEST_CASE("radiance is finite and the gbuffer follows its invariants") {
  auto s = glass_scene();
  s.backdrop.transform.scale = 0.02;  // leave some misses
  auto r = render_frame(s, test_catalog(), 0, fast_settings());
  int misses = 0;
  for (auto& t : r.radiance.texels.pixels) {
    CHECK(std::isfinite(t.r));
    CHECK(t.r >= 0);
    CHECK(t.g >= 0);
    CHECK(t.b >= 0);
  }
  for (auto& g : r.gbuf.texels.pixels) {
    if (g.object_id == 0) {
      misses++;
      CHECK(g.depth_m == infinity);
      CHECK_FALSE(g.is_transparent_hit);
    } else {
      CHECK(std::abs(length(g.world_normal) - 1) <= 1e-4);
      CHECK(g.depth_m > 0);
      CHECK(g.is_transparent_hit == (g.object_id == 1));
    }
  }
  CHECK(misses > 0);
}

TEST_CASE("gbuffer depth is planar depth along the optical axis") {
  auto s = fixtures::empty_scene("grey");
  s.cameras.push_back(make_look_at_camera({0, 0, 2}, {0, 0, 0}, 21, 21, 1.0, {0, 1, 0}));
  auto ctx = render_context(s, test_catalog());
  auto g = render_gbuffer(ctx, 0);
  for (auto& t : g.texels.pixels) CHECK(t.depth_m == doctest::Approx(2).epsilon(1e-9));
}

TEST_CASE("invalid camera index is a render error") {
  auto s = glass_scene();
  CHECK_THROWS_AS(render_frame(s, test_catalog(), 1, fast_settings()), render_error);
  CHECK_THROWS_AS(render_frame(s, test_catalog(), -1, fast_settings()), render_error);
}

TEST_CASE("camera centre ray follows the forward axis") {
  auto cam = make_look_at_camera({1, 2, 3}, {0, 0, 0}, 20, 10, 0.5);
  auto r = camera_ray(cam, 10, 5);
  auto f = camera_forward(cam);
  CHECK(length(r.direction - f) < 1e-12);
  CHECK(length(f - normalize(vec3{-1, -2, -3})) < 1e-12);
}

TEST_CASE("tone mapping") {
  for (auto mode : {tonemap_mode::gamma_srgb, tonemap_mode::linear_clamp}) {
    CHECK(tone_map_value(0, 0, mode) == 0);
    CHECK(tone_map_value(1, 0, mode) == 255);
    CHECK(tone_map_value(0.1, 1, mode) == tone_map_value(0.2, 0, mode));
    auto previous = 0;
    for (double v = 0; v < 1.5; v += 0.01) {
      auto t = tone_map_value(v, 0, mode);
      CHECK(t >= previous);
      previous = t;
    }
  }
  // sRGB transfer of 0.5
  CHECK(tone_map_value(0.5, 0, tonemap_mode::gamma_srgb) == 188);
  CHECK(tone_map_value(0.5, 0, tonemap_mode::linear_clamp) == 128);

  auto img = radiance_image{};
  img.texels = image<rgb32f>(2, 1);
  img.texels.pixels = {{0, 0, 0}, {1, 1, 1}};
  auto settings = render_settings{};
  auto out = tone_map(img, settings);
  CHECK(out.pixels[0] == rgb8{0, 0, 0});
  CHECK(out.pixels[1] == rgb8{255, 255, 255});
  img.camera_exposure_ev = -1;
  CHECK(tone_map(img, settings).pixels[1].r == tone_map_value(0.5, 0, tonemap_mode::gamma_srgb));
}

TEST_CASE("no glass means no caustic photons") {
  auto s = glass_scene();
  s.objects.clear();
  auto ctx = render_context(s, test_catalog());
  CHECK(trace_photons(ctx, fast_settings()).empty());
}

TEST_CASE("ball lens photons focus at the paraxial image point") {
  auto setup = fixtures::ball_lens_scene(0);
  auto ctx = render_context(setup.s, test_catalog());
  auto settings = render_settings{};
  settings.photon_count = 100000;
  auto pm = trace_photons(ctx, settings);
  REQUIRE(pm.size() > 1000);
  auto r = settings.photon_gather_radius_m;
  CHECK(length(weighted_centroid(pm) - setup.focus) <= 2 * r);

  // density peak over photon positions
  auto best = vec3{};
  auto best_count = 0;
  for (size_t i = 0; i < pm.size(); i += pm.size() / 500) {
    auto count = 0;
    pm.for_each_within(pm.photons()[i].position, r, [&](const photon&) { count++; });
    if (count > best_count) {
      best_count = count;
      best = pm.photons()[i].position;
    }
  }
  CHECK(length(best - setup.focus) <= 2 * r);

  // every stored photon went through glass, and energy is not created
  auto& light = setup.s.lights[0];
  auto emitted = light.intensity.y * 2 * pi * (1 - std::cos(light.cone_half_angle));
  CHECK(pm.total_power().y <= emitted);
  for (auto& p : pm.photons()) CHECK(p.specular_bounces >= 1);
}

TEST_CASE("a larger light spreads the caustic") {
  auto moment = [](double radius) {
    auto setup = fixtures::ball_lens_scene(radius);
    auto ctx = render_context(setup.s, test_catalog());
    auto settings = render_settings{};
    settings.photon_count = 50000;
    auto m = 0.0;
    weighted_centroid(trace_photons(ctx, settings), &m);
    return m;
  };
  auto m1 = moment(0.005), m2 = moment(0.01), m3 = moment(0.02);
  CHECK(m1 < m2);
  CHECK(m2 < m3);
}

TEST_CASE("photon tracing is deterministic") {
  auto setup = fixtures::ball_lens_scene(0.01);
  auto ctx = render_context(setup.s, test_catalog());
  auto settings = render_settings{};
  settings.photon_count = 9000;
  auto a = trace_photons(ctx, settings, {16, 1});
  auto b = trace_photons(ctx, settings, {16, 4});
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); i++) CHECK(a.photons()[i].position == b.photons()[i].position);
}

TEST_CASE("dispersion through a wedge separates red and blue deposits") {
  // wedge apex up, centred 0.3 m above the plane; vertical light onto its +x face
  auto s = fixtures::empty_scene("black");
  auto wedge = object_instance{};
  wedge.object_id = 1;
  wedge.mesh = "wedge";
  wedge.transform.translation = {0, 0, 0.3};
  wedge.material = fixtures::clear_glass(10);
  wedge.semantic = semantic_class::transparent;
  s.objects.push_back(wedge);
  s.lights.push_back(fixtures::point_light({0.05, 0, 1.0}, {0.05, 0, 0}, 10, 0.02));
  auto ctx = render_context(s, test_catalog());
  auto settings = render_settings{};
  settings.photon_count = 60000;
  auto pm = trace_photons(ctx, settings);

  vec3 centroid[3] = {};
  double weight[3] = {};
  // two refractions; Fresnel reflections off the entry face land on the far side
  for (auto& p : pm.photons()) {
    if (p.band < 0 || p.specular_bounces != 2) continue;
    auto power = p.band == 0 ? p.power.x : (p.band == 1 ? p.power.y : p.power.z);
    centroid[p.band] += p.position * power;
    weight[p.band] += power;
  }
  REQUIRE(weight[0] > 0);
  REQUIRE(weight[2] > 0);
  auto red = centroid[0] / weight[0], blue = centroid[2] / weight[2];

  // Oracle: the axial ray enters the face tilted by atan(2) from horizontal,
  // bends toward -x, and leaves through the flat base at z = 0.2.
  auto bands = dispersion_band_iors(1.5, 10);
  auto landing_x = [](double n) {
    auto alpha = std::atan(2.0);
    auto inside = alpha - std::asin(std::sin(alpha) / n);
    auto out = std::asin(n * std::sin(inside));
    auto z_entry = 0.3 + 0.1 - 2 * 0.05;
    auto x_base = 0.05 - (z_entry - 0.2) * std::tan(inside);
    return x_base - 0.2 * std::tan(out);
  };
  auto expected_red = landing_x(bands.red), expected_blue = landing_x(bands.blue);
  REQUIRE(expected_blue < expected_red);
  CHECK(blue.x < red.x);
  CHECK(std::abs(red.x - expected_red) < 0.01);
  CHECK(std::abs(blue.x - expected_blue) < 0.01);
}

TEST_CASE("photon map radius queries match a linear scan") {
  auto photons = std::vector<photon>{};
  auto stream = rng_stream::substream(1, "pm");
  for (int i = 0; i < 3000; i++) {
    auto p = photon{};
    p.position = {stream.uniform(-1, 1), stream.uniform(-1, 1), stream.uniform(-0.1, 0.1)};
    p.power = {1, 1, 1};
    photons.push_back(p);
  }
  auto pm = photon_map(photons);
  CHECK(pm.total_power().x == doctest::Approx(3000));
  for (int q = 0; q < 50; q++) {
    auto c = vec3{stream.uniform(-1, 1), stream.uniform(-1, 1), 0};
    auto expected = 0;
    for (auto& p : photons) expected += length_squared(p.position - c) <= 0.1 * 0.1;
    auto got = 0;
    pm.for_each_within(c, 0.1, [&](const photon&) { got++; });
    CHECK(got == expected);
  }
}
