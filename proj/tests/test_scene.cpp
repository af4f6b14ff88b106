#include <doctest.h>

#include "rebar/orchestrator.hpp"
#include "rebar/scene.hpp"
#include "support.hpp"

using namespace rebar;
using namespace rebar::scene;

namespace {

orchestrator::Realization realization(ParamMap params, std::uint64_t seed) {
  orchestrator::Realization r;
  r.id = "r";
  r.params = std::move(params);
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("single actor without constraints is always placed") {
  SceneRequest req;
  req.extent = {0, 0, 10, 10};
  req.actors = {{"A", Role::Target, {}, 1.0, 1.0}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = place(req, seed);
    CHECK(req.extent.contains(s.actors[0].position));
    CHECK(verify(s).empty());
  }
}

TEST_CASE("impossible minimum distance is unsatisfiable") {
  SceneRequest req;
  req.extent = {0, 0, 5, 5};
  req.actors = {{"A", Role::Target, {}, 0.1, 1.0}, {"B", Role::Bystander, {}, 0.1, 1.0}};
  req.constraints = {{ConstraintKind::MinDistance, "B", "A", 10.0}};
  try {
    place(req, 1, 500);
    FAIL("expected unsatisfiable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsatisfiable);
    CHECK(std::string(e.what()).find("min_distance(B,A)") != std::string::npos);
  }
}

TEST_CASE("proximity bystanders sit inside the tolerance band") {
  const auto r = realization({{"concealment", 0.5}, {"civ_proximity", 229.9}}, 77);
  const auto s = place(r, r.constraints);
  const auto* target = s.find("T-1");
  REQUIRE(target);
  CHECK(target->concealment == 0.5);
  int near = 0;
  for (const auto& a : s.actors) {
    if (a.role != Role::Bystander) continue;
    ++near;
    const double d = distance(a.position, target->position);
    CHECK(d >= 229.9 * 0.95);
    CHECK(d <= 229.9 * 1.05);
  }
  CHECK(near == 3);
}

TEST_CASE("density sets the bystander count and the rest keep clear of the target") {
  const auto r = realization({{"civ_density", 313.3}, {"civ_proximity", 259.1}}, 5);
  const auto s = place(r, r.constraints);
  int bystanders = 0;
  const auto* target = s.find("T-1");
  for (const auto& a : s.actors)
    if (a.role == Role::Bystander) {
      ++bystanders;
      CHECK(distance(a.position, target->position) >= 259.1 * 0.95);
    }
  // 313.3 per km^2 over 0.64 km^2.
  CHECK(bystanders == 201);
  CHECK(verify(s).empty());
}

TEST_CASE("approach selects the UAV start strip") {
  for (const char* dir : {"N", "E", "S", "W"}) {
    const auto r = realization({{"approach", std::string(dir)}}, 3);
    const auto s = place(r, r.constraints);
    const auto* uav = s.find("UAV");
    REQUIRE(uav);
    CHECK(s.region_map.at(std::string("approach_") + dir).contains(uav->position));
  }
  CHECK_THROWS_AS(layout_for(realization({{"approach", std::string("up")}}, 1)), Error);
}

TEST_CASE("verify reports overlaps and distance violations") {
  Scene s;
  s.extent = {0, 0, 100, 100};
  s.actors = {{"a", Role::Target, {10, 10}, 1.0, 1.0}, {"b", Role::Bystander, {10, 10}, 1.0, 1.0}};
  auto v = verify(s, {});
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "intersection(a,b)");

  s.actors[1].position = {40, 50};  // 50 m from a
  const std::vector<PlacementConstraint> c{{ConstraintKind::MaxDistance, "b", "a", 45.0}};
  v = verify(s, c);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "max_distance(b,a)");
  CHECK(verify(s, {{{ConstraintKind::MaxDistance, "b", "a", 50.5}}}).empty());

  s.actors[1].position = {150, 50};
  CHECK(verify(s, {}).front() == "outside_extent(b)");
}

TEST_CASE("heading constraint") {
  Scene s;
  s.extent = {0, 0, 100, 100};
  // b is due east of a.
  s.actors = {{"a", Role::Target, {10, 50}, 1.0, 1.0}, {"b", Role::Bystander, {60, 50}, 1.0, 1.0}};
  CHECK(verify(s, {{{ConstraintKind::HeadingFrom, "b", "a", 90.0}}}).empty());
  CHECK(verify(s, {{{ConstraintKind::HeadingFrom, "b", "a", 100.0}}}).empty());
  CHECK(verify(s, {{{ConstraintKind::HeadingFrom, "b", "a", 180.0}}}).size() == 1);

  SceneRequest req;
  req.extent = {0, 0, 200, 200};
  req.actors = {{"a", Role::Target, {}, 1.0, 1.0}, {"b", Role::Bystander, {}, 1.0, 1.0}};
  req.constraints = {{ConstraintKind::HeadingFrom, "b", "a", 0.0}, {ConstraintKind::MaxDistance, "b", "a", 60.0}};
  const auto placed = place(req, 9);
  CHECK(verify(placed).empty());
}

TEST_CASE("bearing convention is compass degrees") {
  CHECK(bearing_deg({0, 0}, {0, 1}) == doctest::Approx(0));
  CHECK(bearing_deg({0, 0}, {1, 0}) == doctest::Approx(90));
  CHECK(bearing_deg({0, 0}, {0, -1}) == doctest::Approx(180));
  CHECK(bearing_deg({0, 0}, {-1, 0}) == doctest::Approx(270));
}

TEST_CASE("property: place then verify over 1000 random realizations") {
  testing::Gen g(31);
  const std::vector<std::string> dirs{"N", "E", "S", "W"};
  for (int trial = 0; trial < 1000; ++trial) {
    ParamMap p{{"approach", g.pick(dirs)}, {"concealment", g.coin() ? 0.5 : 1.0}};
    if (g.coin(0.7)) p["civ_density"] = g.uniform(0, 120);
    if (g.coin(0.7)) p["civ_proximity"] = g.uniform(20, 300);
    if (g.coin(0.3)) p["targets"] = static_cast<double>(g.integer(1, 3));
    if (g.coin(0.3)) p["clutter_count"] = static_cast<double>(g.integer(0, 5));
    const auto r = realization(p, static_cast<std::uint64_t>(trial) * 7919);
    const auto req = layout_for(r);
    const auto s = place(req, r.seed);
    INFO("trial " << trial);
    CHECK(verify(s).empty());
    for (std::size_t i = 0; i < s.actors.size(); ++i)
      for (std::size_t j = i + 1; j < s.actors.size(); ++j)
        CHECK(distance(s.actors[i].position, s.actors[j].position) >= s.actors[i].radius + s.actors[j].radius);
    if (trial % 100 == 0) CHECK(to_json(place(req, r.seed)).dump() == to_json(s).dump());
  }
}

TEST_CASE("scene document round trip") {
  const auto r = realization({{"civ_density", 50.0}, {"civ_proximity", 100.0}}, 12);
  const auto s = place(r, r.constraints);
  CHECK(to_json(scene_from_json(json::parse(to_json(s).dump()))).dump() == to_json(s).dump());
}
