#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "clearsim/bvh.h"
#include "clearsim/error.h"
#include "clearsim/optics.h"
#include "doctest.h"

using namespace clearsim;

namespace {

vec3 random_unit(std::mt19937_64& gen) {
  auto n = std::normal_distribution<double>();
  return normalize(vec3{n(gen), n(gen), n(gen)});
}

std::vector<triangle> random_soup(size_t count, uint64_t seed) {
  auto gen = std::mt19937_64(seed);
  auto u = std::uniform_real_distribution<double>(-1, 1);
  auto small = std::uniform_real_distribution<double>(-0.08, 0.08);
  auto tris = std::vector<triangle>(count);
  for (auto& t : tris) {
    auto c = vec3{u(gen), u(gen), u(gen)};
    t = {c + vec3{small(gen), small(gen), small(gen)}, c + vec3{small(gen), small(gen), small(gen)},
        c + vec3{small(gen), small(gen), small(gen)}};
  }
  return tris;
}

double degrees(double rad) { return rad * 180 / pi; }

}  // namespace

TEST_CASE("single triangle builds one leaf and matches the analytic test") {
  auto tri = std::vector<triangle>{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}};
  auto b = bvh(tri);
  CHECK(b.nodes().size() == 1);
  CHECK(b.nodes()[0].count == 1);
  auto gen = std::mt19937_64(1);
  auto u = std::uniform_real_distribution<double>(-0.5, 1.5);
  for (int i = 0; i < 1000; i++) {
    auto r = ray3{{u(gen), u(gen), 1}, {0, 0, -1}};
    auto expect = intersect_triangle(r, tri[0], 0);
    auto got = b.intersect(r);
    REQUIRE(expect.has_value() == got.has_value());
    if (got) CHECK(got->t == expect->t);
  }
  auto hit = b.intersect({{0.25, 0.25, 1}, {0, 0, -1}});
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1));
  CHECK_FALSE(b.intersect({{0.75, 0.75, 1}, {0, 0, -1}}));
}

TEST_CASE("bvh matches the brute-force oracle on 10k triangles and 10k rays") {
  auto tris = random_soup(10000, 2);
  auto b = bvh(tris);
  auto gen = std::mt19937_64(3);
  auto u = std::uniform_real_distribution<double>(-1.5, 1.5);
  int hits = 0, mismatches = 0;
  for (int i = 0; i < 10000; i++) {
    auto r = ray3{{u(gen), u(gen), u(gen)}, random_unit(gen)};
    auto expect = intersect_brute_force(r, tris);
    auto got = b.intersect(r);
    if (expect.has_value() != got.has_value()) {
      mismatches++;
      continue;
    }
    if (!got) continue;
    hits++;
    if (got->primitive != expect->primitive || std::abs(got->t - expect->t) > 1e-6 * expect->t) mismatches++;
    CHECK(b.occluded(r) == true);
  }
  CHECK(mismatches == 0);
  CHECK(hits > 1000);
}

TEST_CASE("bvh structure references every triangle once with nested bounds") {
  auto tris = random_soup(3000, 4);
  auto b = bvh(tris);
  auto& idx = b.indices();
  CHECK(std::set<uint32_t>(idx.begin(), idx.end()).size() == tris.size());
  CHECK(idx.size() == tris.size());
  auto& nodes = b.nodes();
  size_t leaf_total = 0;
  for (uint32_t i = 0; i < nodes.size(); i++) {
    auto& n = nodes[i];
    if (n.count > 0) {
      leaf_total += n.count;
      for (uint32_t k = n.first; k < n.first + n.count; k++) {
        auto& t = tris[idx[k]];
        auto tb = bbox3{};
        tb.expand(t.v0);
        tb.expand(t.v1);
        tb.expand(t.v2);
        CHECK(n.bounds.contains(tb));
      }
    } else {
      CHECK(n.bounds.contains(nodes[i + 1].bounds));
      CHECK(n.bounds.contains(nodes[n.first].bounds));
    }
  }
  CHECK(leaf_total == tris.size());
}

TEST_CASE("degenerate triangles are skipped and counted") {
  auto tris = std::vector<triangle>{
      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}},
      {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}},
      {{3, 3, 3}, {3, 3, 3}, {3, 3, 3}},
  };
  auto b = bvh(tris);
  CHECK(b.degenerate_count() == 2);
  CHECK(b.indices().size() == 1);
}

TEST_CASE("bvh rejects empty and non-finite geometry") {
  CHECK_THROWS_AS(bvh(std::vector<triangle>{}), domain_error);
  auto nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bvh(std::vector<triangle>{{{nan, 0, 0}, {1, 0, 0}, {0, 1, 0}}}), domain_error);
}

TEST_CASE("occlusion agrees with the nearest-hit oracle within a segment") {
  auto tris = random_soup(2000, 5);
  auto b = bvh(tris);
  auto gen = std::mt19937_64(6);
  auto u = std::uniform_real_distribution<double>(-1.5, 1.5);
  for (int i = 0; i < 2000; i++) {
    auto r = ray3{{u(gen), u(gen), u(gen)}, random_unit(gen), 0, 0.5};
    CHECK(b.occluded(r) == intersect_brute_force(r, tris).has_value());
  }
}

TEST_CASE("refraction at normal incidence passes straight through") {
  for (auto eta : {0.5, 1.0, 1 / 1.5, 1.5}) {
    auto t = refract({0, 0, -1}, {0, 0, 1}, eta);
    REQUIRE(t);
    CHECK(t->x == doctest::Approx(0));
    CHECK(t->z == doctest::Approx(-1));
  }
}

TEST_CASE("refraction at 45 degrees entering glass") {
  auto d = normalize(vec3{1, 0, -1});
  auto t = refract(d, {0, 0, 1}, 1 / 1.5);
  REQUIRE(t);
  auto angle = degrees(std::atan2(t->x, -t->z));
  auto expected = degrees(std::asin(std::sin(pi / 4) / 1.5));
  CHECK(std::abs(angle - expected) < 1e-3);
  CHECK(std::abs(angle - 28.1255) < 1e-3);
  CHECK(length(*t) == doctest::Approx(1));
}

TEST_CASE("45 degrees exiting glass is totally internally reflected") {
  auto d = normalize(vec3{1, 0, -1});
  CHECK_FALSE(refract(d, {0, 0, 1}, 1.5));
  // just inside the critical angle still refracts
  auto critical = std::asin(1 / 1.5);
  auto below = vec3{std::sin(critical - 1e-4), 0, -std::cos(critical - 1e-4)};
  CHECK(refract(below, {0, 0, 1}, 1.5).has_value());
  auto above = vec3{std::sin(critical + 1e-4), 0, -std::cos(critical + 1e-4)};
  CHECK_FALSE(refract(above, {0, 0, 1}, 1.5).has_value());
}

TEST_CASE("refraction is reciprocal") {
  auto gen = std::mt19937_64(7);
  auto eta_dist = std::uniform_real_distribution<double>(0.4, 2.5);
  int checked = 0;
  for (int i = 0; i < 2000; i++) {
    auto n = random_unit(gen);
    auto d = random_unit(gen);
    if (dot(d, n) >= -1e-3) d = reflect(d, n);
    if (dot(d, n) >= -1e-3) continue;
    auto eta = eta_dist(gen);
    auto t = refract(d, n, eta);
    if (!t) continue;
    auto back = refract(-*t, -n, 1 / eta);
    REQUIRE(back);
    CHECK(length(*back + d) < 1e-5);
    // Snell's law
    auto sin_i = length(cross(d, n)), sin_t = length(cross(*t, n));
    CHECK(sin_t == doctest::Approx(eta * sin_i).epsilon(1e-9));
    checked++;
  }
  CHECK(checked > 500);
}

TEST_CASE("fresnel reflectance") {
  CHECK(std::abs(fresnel_reflectance(1, 1, 1.5) - 0.04) <= 1e-9);
  CHECK(std::abs(fresnel_reflectance(1, 1.5, 1) - 0.04) <= 1e-9);
  for (double c = 0.01; c <= 1; c += 0.07) CHECK(fresnel_reflectance(c, 1.33, 1.33) == doctest::Approx(0).epsilon(1e-12));
  CHECK(fresnel_reflectance(1e-4, 1, 1.5) >= 0.999);
  CHECK(fresnel_reflectance(std::cos(pi / 4), 1.5, 1) == 1.0);
  auto previous = 1.0;
  for (double c = 0.05; c <= 1; c += 0.05) {
    auto f = fresnel_reflectance(c, 1, 1.5);
    CHECK(f >= 0);
    CHECK(f <= previous + 1e-12);
    previous = f;
  }
}

TEST_CASE("ggx sampled normals stay in the upper hemisphere and concentrate with low roughness") {
  auto gen = std::mt19937_64(8);
  auto u = std::uniform_real_distribution<double>(0, 1);
  auto n = normalize(vec3{0.3, -0.2, 1});
  for (auto roughness : {0.05, 0.4, 1.0}) {
    auto alpha = ggx_alpha(roughness);
    auto mean_cos = 0.0;
    for (int i = 0; i < 2000; i++) {
      auto m = ggx_sample_normal(n, alpha, u(gen), u(gen));
      CHECK(dot(m, n) > 0);
      CHECK(length(m) == doctest::Approx(1));
      mean_cos += dot(m, n) / 2000;
    }
    if (roughness == 0.05) CHECK(mean_cos > 0.999);
    if (roughness == 1.0) CHECK(mean_cos < 0.9);
  }
  CHECK(ggx_g1(1, 0.3) == doctest::Approx(1));
}
