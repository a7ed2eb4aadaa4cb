#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "clearsim/error.h"
#include "clearsim/scene_gen.h"
#include "doctest.h"
#include "fixtures.h"

using namespace clearsim;

namespace {

const asset_catalog& default_catalog() {
  static const asset_catalog c = make_default_catalog(6, 5);
  return c;
}

generation_config small_config() { return default_generation_config(default_catalog(), 64, 48); }

// Lowest world-space vertex height of an instance.
double lowest_point(const object_instance& o, const asset_catalog& catalog) {
  auto lowest = infinity;
  for (auto& p : catalog.get_mesh(o.mesh).positions) lowest = std::min(lowest, o.transform.apply_point(p).z);
  return lowest;
}

// Independent footprint radius: furthest mesh vertex from the pivot, scaled.
double pivot_radius(const object_instance& o, const asset_catalog& catalog) {
  auto r = 0.0;
  for (auto& p : catalog.get_mesh(o.mesh).positions) r = std::max(r, length(p));
  return r * o.transform.scale;
}

}  // namespace

TEST_CASE("empty object range yields only backdrop, props, lights and cameras") {
  auto config = small_config();
  config.object_count = {0, 0};
  auto s = generate_scene(config, default_catalog(), 5);
  CHECK(s.objects.empty());
  CHECK(s.backdrop.object_id >= 1);
  CHECK(s.lights.size() == 1);
  CHECK(s.cameras.size() == config.camera_rig.size());
  validate_scene(s, &default_catalog());
}

TEST_CASE("generation is a pure function of config and seed") {
  auto config = small_config();
  auto a = generate_scene(config, default_catalog(), 99);
  auto b = generate_scene(config, default_catalog(), 99);
  CHECK(a == b);
  CHECK(serialize_scene(a) == serialize_scene(b));
  CHECK_FALSE(generate_scene(config, default_catalog(), 100) == a);
}

TEST_CASE("object counts are uniform over the configured range") {
  auto config = small_config();
  config.object_count = {3, 7};
  config.prop_count = {0, 0};
  auto histogram = std::map<size_t, int>{};
  for (uint64_t seed = 0; seed < 1000; seed++) {
    auto s = generate_scene(config, default_catalog(), seed);
    REQUIRE(s.objects.size() >= 3);
    REQUIRE(s.objects.size() <= 7);
    histogram[s.objects.size()]++;
  }
  for (size_t n = 3; n <= 7; n++) {
    auto share = histogram[n] / 1000.0;
    CHECK(std::abs(share - 0.2) <= 0.05);
  }
}

TEST_CASE("generated instances rest on the support plane without overlapping") {
  auto config = small_config();
  auto& catalog = default_catalog();
  int violations = 0;
  for (uint64_t seed = 0; seed < 100; seed++) {
    auto s = generate_scene(config, catalog, seed);
    auto all = s.objects;
    all.insert(all.end(), s.props.begin(), s.props.end());
    for (auto& o : all) CHECK(std::abs(lowest_point(o, catalog)) <= 1e-4);
    for (size_t i = 0; i < all.size(); i++) {
      for (size_t j = i + 1; j < all.size(); j++) {
        auto ri = pivot_radius(all[i], catalog), rj = pivot_radius(all[j], catalog);
        auto d = std::hypot(all[i].transform.translation.x - all[j].transform.translation.x,
            all[i].transform.translation.y - all[j].transform.translation.y);
        if (ri + rj - d > 0.1 * std::min(ri, rj) + 1e-12) violations++;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("backdrop and environment come from the banks") {
  auto config = small_config();
  auto seen_env = std::set<std::string>{};
  auto seen_backdrop = std::set<std::string>{};
  for (uint64_t seed = 0; seed < 200; seed++) {
    auto s = generate_scene(config, default_catalog(), seed);
    CHECK(std::count(config.hdri_bank.begin(), config.hdri_bank.end(), s.environment.id) == 1);
    seen_env.insert(s.environment.id);
    auto& m = std::get<diffuse_material>(s.backdrop.material);
    seen_backdrop.insert(s.backdrop.mesh + m.texture + std::to_string(m.albedo.x) + std::to_string(m.albedo.y));
  }
  CHECK(seen_env.size() == config.hdri_bank.size());
  CHECK(seen_backdrop.size() == config.backdrop_bank.size());
}

TEST_CASE("prop count does not perturb object placement") {
  auto config = small_config();
  config.prop_count = {0, 0};
  auto a = generate_scene(config, default_catalog(), 31);
  config.prop_count = {3, 3};
  auto b = generate_scene(config, default_catalog(), 31);
  CHECK(a.objects == b.objects);
  CHECK(b.props.size() == 3);
}

TEST_CASE("settle_drop with zero impulse keeps the spawn point") {
  auto proxy = make_settle_proxy(fixtures::test_catalog(), "cube", 1, 1);
  auto stream = rng_stream::substream(1, "drop");
  auto t = settle_drop(proxy, {0.125, -0.25}, 0, stream);
  CHECK(t.translation.x == 0.125);
  CHECK(t.translation.y == -0.25);
}

TEST_CASE("settled sphere rests at its radius") {
  auto proxy = make_settle_proxy(fixtures::test_catalog(), "sphere", 0.1, 1);
  auto stream = rng_stream::substream(2, "drop");
  for (int i = 0; i < 20; i++) {
    auto t = settle_drop(proxy, {0, 0}, 0.5, stream);
    CHECK(std::abs(t.translation.z - 0.1) <= 1e-4);
  }
}

TEST_CASE("settle_drop displacement is bounded and orientations come from the rest set") {
  auto& catalog = fixtures::test_catalog();
  auto proxy = make_settle_proxy(catalog, "wedge", 1.5, 1);
  auto stream = rng_stream::substream(3, "drop");
  for (int i = 0; i < 500; i++) {
    auto t = settle_drop(proxy, {1, 2}, 0.7, stream);
    CHECK(std::hypot(t.translation.x - 1, t.translation.y - 2) <= 0.7 * proxy.bounding_radius_m + 1e-12);
    // the yaw only spins about z, so the rest orientation's down axis survives
    auto matches = false;
    for (auto& q : proxy.rest_orientations) {
      auto a = rotate(t.rotation, rotate(conjugate(q), {0, 0, -1}));
      matches = matches || a.z < -1 + 1e-9;
    }
    CHECK(matches);
    auto placed = t;
    placed.scale = 1.5;
    auto o = object_instance{1, "wedge", placed, glass_material{}, semantic_class::transparent};
    CHECK(std::abs(lowest_point(o, catalog)) <= 1e-4);
  }
}

TEST_CASE("settle_drop is deterministic in the stream state") {
  auto proxy = make_settle_proxy(fixtures::test_catalog(), "wedge", 1, 1);
  auto a = rng_stream::substream(4, "drop");
  auto b = a;
  CHECK(settle_drop(proxy, {0, 0}, 1, a) == settle_drop(proxy, {0, 0}, 1, b));
}

TEST_CASE("place_props with an empty range returns the input") {
  auto config = small_config();
  config.prop_count = {0, 0};
  auto s = generate_scene(config, default_catalog(), 8);
  auto stream = rng_stream::substream(8, "again");
  CHECK(place_props(s, config, default_catalog(), stream) == s);
}

TEST_CASE("place_props is deterministic and leaves the input untouched") {
  auto config = small_config();
  config.prop_count = {0, 0};
  auto s = generate_scene(config, default_catalog(), 9);
  auto copy = s;
  config.prop_count = {2, 3};
  auto a = rng_stream::substream(1, "p");
  auto b = rng_stream::substream(1, "p");
  auto pa = place_props(s, config, default_catalog(), a);
  auto pb = place_props(s, config, default_catalog(), b);
  CHECK(pa == pb);
  CHECK(s == copy);
  CHECK(pa.props.size() >= 2);
  CHECK(pa.objects == s.objects);
}

TEST_CASE("generation config validation") {
  auto config = small_config();
  SUBCASE("inverted range") {
    config.object_count = {5, 2};
    CHECK_THROWS_AS(generate_scene(config, default_catalog(), 1), validation_error);
  }
  SUBCASE("flat spawn region") {
    config.spawn_region.max.x = config.spawn_region.min.x;
    CHECK_THROWS_AS(generate_scene(config, default_catalog(), 1), validation_error);
  }
  SUBCASE("empty bank") {
    config.hdri_bank.clear();
    CHECK_THROWS_AS(generate_scene(config, default_catalog(), 1), validation_error);
  }
  SUBCASE("unknown mesh") {
    config.object_catalog[0].mesh = "nope";
    CHECK_THROWS_AS(generate_scene(config, default_catalog(), 1), asset_error);
  }
}

TEST_CASE("overfull spawn region fails with a placement error") {
  auto config = small_config();
  config.object_count = {40, 40};
  config.spawn_region = {{-0.05, -0.05, 0.2}, {0.05, 0.05, 0.3}};
  config.impulse_intensity = 0;
  config.max_placement_attempts = 20;
  CHECK_THROWS_AS(generate_scene(config, default_catalog(), 1), placement_error);
}
