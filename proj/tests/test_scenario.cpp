#include <doctest.h>

#include "rebar/scenario.hpp"
#include "support.hpp"

using namespace rebar;
using namespace rebar::scenario;

TEST_CASE("enumerated and range slots") {
  const auto s = parse_scenario("[1,2] vehicles [20-40] meters away");
  REQUIRE(s.slots.size() == 2);
  CHECK(s.slots[0].name == "vehicles");
  CHECK(s.slots[0].kind == SlotKind::Enumerated);
  CHECK(s.slots[0].values == std::vector<Scalar>{1.0, 2.0});
  CHECK(s.slots[1].name == "meters_away");
  CHECK(s.slots[1].kind == SlotKind::Range);
  CHECK(s.slots[1].lo == 20);
  CHECK(s.slots[1].hi == 40);
  CHECK(s.narrative == "{vehicles} vehicles {meters_away} meters away");
}

TEST_CASE("prose without brackets is unchanged") {
  const auto s = parse_scenario("a clear day");
  CHECK(s.slots.empty());
  CHECK(s.narrative == "a clear day");
  CHECK(slot_cardinality(s, 5) == 1);
}

TEST_CASE("word and number sets") {
  const auto s = parse_scenario("[N,E,S,W] approach with concealment [0.5,1]");
  REQUIRE(s.slots.size() == 2);
  CHECK(s.slots[0].values == std::vector<Scalar>{std::string("N"), std::string("E"), std::string("S"),
                                                 std::string("W")});
  CHECK(s.slots[0].name == "approach_with_concealment");
  CHECK(s.slots[1].name == "concealment");
  CHECK(s.slots[1].values == std::vector<Scalar>{0.5, 1.0});
}

TEST_CASE("name override, collisions and fallbacks") {
  const auto s = parse_scenario("[speed: 1,2] then [3,4] then [5,6] then.\n[7,8]");
  REQUIRE(s.slots.size() == 4);
  CHECK(s.slots[0].name == "speed");
  CHECK(s.slots[1].name == "then");
  CHECK(s.slots[2].name == "then_2");
  CHECK(s.slots[3].name == "slot");
}

TEST_CASE("directives bind fixed parameters, mission, id and constraints") {
  const auto s = parse_scenario(
      "@id: demo\n@mission: find it\n@Rain level: 3\n@sky: overcast\n@constraint: min_distance B-1 T-1 25\n"
      "Look [1,2] times.\n");
  CHECK(s.id == "demo");
  CHECK(s.mission_objective == "find it");
  CHECK(s.fixed.at("Rain level") == Scalar(3.0));
  CHECK(s.fixed.at("sky") == Scalar(std::string("overcast")));
  REQUIRE(s.constraints.size() == 1);
  CHECK(s.constraints[0].describe() == "min_distance(B-1,T-1)");
  CHECK(s.narrative == "Look {times} times.\n");
}

TEST_CASE("grammar errors") {
  CHECK_THROWS_AS(parse_scenario("a [1,2 b"), Error);
  CHECK_THROWS_AS(parse_scenario("a 1,2] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a [] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a [40-20] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a [1-2,3] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a [1,1] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a [1,,2] b"), Error);
  CHECK_THROWS_AS(parse_scenario("a {b}"), Error);
  CHECK_THROWS_AS(parse_scenario("a [[1]] b"), Error);
  CHECK_THROWS_AS(parse_scenario("@x: 1\n[x: 1,2] y"), Error);
}

TEST_CASE("negative numbers are enumerated, not ranges") {
  const auto s = parse_scenario("offset [-5,5] m");
  CHECK(s.slots[0].values == std::vector<Scalar>{-5.0, 5.0});
  CHECK_THROWS_AS(parse_scenario("offset [-5-5] m"), Error);
}

TEST_CASE("cardinality") {
  const auto env = parse_scenario(read_file(testing::data_path("environment.scenario")));
  CHECK(slot_cardinality(env, 2) == 72);
  CHECK(slot_cardinality(parse_scenario("[0-10] m"), 5) == 5);
  // Brute-force cross product.
  std::size_t count = 0;
  for (std::size_t a = 0; a < env.slots[0].values.size(); ++a)
    for (std::size_t b = 0; b < env.slots[1].values.size(); ++b)
      for (std::size_t c = 0; c < env.slots[2].values.size(); ++c)
        for (std::size_t d = 0; d < env.slots[3].values.size(); ++d) ++count;
  CHECK(count == 72);
}

TEST_CASE("range levels include both endpoints") {
  const auto s = parse_scenario("[20-40] meters");
  CHECK(s.slots[0].levels(3) == std::vector<Scalar>{20.0, 30.0, 40.0});
}

TEST_CASE("role sidecar") {
  auto s = parse_scenario("[1,2] vehicles");
  apply_roles(s, R"({"vehicles": "target_count"})");
  CHECK(s.roles.at("vehicles") == "target_count");
  CHECK_THROWS_AS(apply_roles(s, R"({"boats": "target_count"})"), Error);
  CHECK_THROWS_AS(apply_roles(s, "[1]"), Error);
}

TEST_CASE("property: render removes brackets and parsing is deterministic") {
  testing::Gen g(21);
  const std::vector<std::string> words{"red", "vehicle", "near", "the", "road", "drone", "at", "dusk"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int parts = g.integer(1, 6);
    for (int p = 0; p < parts; ++p) {
      text += g.pick(words) + " ";
      if (g.coin(0.6)) {
        if (g.coin()) {
          const double lo = g.integer(0, 50);
          text += "[" + format_number(lo) + "-" + format_number(lo + g.integer(1, 50)) + "] ";
        } else {
          const int n = g.integer(1, 4);
          text += "[";
          for (int i = 0; i < n; ++i) text += (i ? "," : "") + std::to_string(i * 3 + g.integer(0, 2));
          text += "] ";
        }
      }
    }
    INFO(text);
    const auto a = parse_scenario(text);
    const auto b = parse_scenario(text);
    CHECK(to_json(a).dump() == to_json(b).dump());
    ParamMap assignment;
    for (const auto& slot : a.slots) assignment[slot.name] = slot.levels(2).front();
    const auto rendered = render(a, assignment);
    CHECK(rendered.find('[') == std::string::npos);
    CHECK(parse_scenario(rendered).slots.empty());
    CHECK(to_json(base_from_json(to_json(a))).dump() == to_json(a).dump());
  }
}
