#include "rebar/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "rebar/orchestrator.hpp"
#include "rebar/rng.hpp"

namespace rebar::scene {

namespace {

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::UavStart, "uav_start"},
    {Role::Target, "target"},
    {Role::Bystander, "bystander"},
    {Role::Clutter, "clutter"},
};

// Parameter names recognised without a role map.
const std::map<std::string_view, std::vector<std::string_view>> kAliases = {
    {roles::kRainLevel, {"Rain level"}},
    {roles::kFogLevel, {"Fog level"}},
    {roles::kHoursTillSolarNoon, {"Hours till solar noon"}},
    {roles::kUavAltitude, {"UAV altitude"}},
    {roles::kUavApproach, {"approach"}},
    {roles::kTargetCount, {"targets", "vehicles"}},
    {roles::kTargetConcealment, {"concealment"}},
    {roles::kBystanderDensity, {"civ_density"}},
    {roles::kBystanderProximity, {"civ_proximity"}},
};

constexpr double kHeadingTolerance = 22.5;

double json_number(const json& j, const char* key) { return j.at(key).get<double>(); }

json rect_to_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) fail("rectangle must be [x0, y0, x1, y1]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

int count_param(const orchestrator::Realization& r, std::string_view role, int fallback) {
  const double v = role_number(r.params, r.roles, role, fallback);
  if (v < 0 || v != std::floor(v)) fail("role '" + std::string(role) + "' must be a non-negative integer");
  return static_cast<int>(v);
}

std::string approach_of(const orchestrator::Realization& r) {
  auto v = resolve_role(r.params, r.roles, roles::kUavApproach);
  if (!v) return "S";
  if (is_number(*v)) fail("approach must be one of N, E, S, W");
  std::string s = std::get<std::string>(*v);
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "NORTH") s = "N";
  if (s == "EAST") s = "E";
  if (s == "SOUTH") s = "S";
  if (s == "WEST") s = "W";
  if (s != "N" && s != "E" && s != "S" && s != "W") fail("approach must be one of N, E, S, W, got '" + s + "'");
  return s;
}

}  // namespace

double bearing_deg(Vec2 from, Vec2 to) {
  double b = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / std::numbers::pi;
  if (b < 0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

Rect Rect::intersect(const Rect& o) const {
  return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
}

std::string_view to_string(Role role) {
  for (auto [r, name] : kRoleNames)
    if (r == role) return name;
  return "?";
}

Role role_from_string(std::string_view text) {
  for (auto [r, name] : kRoleNames)
    if (name == text) return r;
  fail("unknown actor role '" + std::string(text) + "'");
}

const Actor* Scene::find(std::string_view id) const {
  for (const auto& a : actors)
    if (a.id == id) return &a;
  return nullptr;
}

std::optional<Scalar> resolve_role(const ParamMap& params, const std::map<std::string, std::string>& role_map,
                                   std::string_view role) {
  for (const auto& [param, bound] : role_map) {
    if (bound != role) continue;
    if (auto it = params.find(param); it != params.end()) return it->second;
  }
  if (auto it = params.find(std::string(role)); it != params.end()) return it->second;
  if (auto a = kAliases.find(role); a != kAliases.end()) {
    for (auto alias : a->second)
      if (auto it = params.find(std::string(alias)); it != params.end()) return it->second;
  }
  return std::nullopt;
}

double role_number(const ParamMap& params, const std::map<std::string, std::string>& role_map,
                   std::string_view role, double fallback) {
  auto v = resolve_role(params, role_map, role);
  if (!v) return fallback;
  if (!is_number(*v)) fail("role '" + std::string(role) + "' must be numeric, got '" + to_text(*v) + "'");
  return std::get<double>(*v);
}

SceneRequest layout_for(const orchestrator::Realization& r) {
  SceneRequest req;
  const double side = role_number(r.params, r.roles, roles::kSceneExtent, kDefaultExtent);
  if (!(side > 0)) fail("scene extent must be positive");
  const double sub = std::min(role_number(r.params, r.roles, roles::kSubregionSize, kDefaultSubregion), side);
  if (!(sub > 0)) fail("subregion size must be positive");
  req.extent = {0, 0, side, side};
  const double c = side / 2, h = sub / 2, strip = side * 0.05;
  req.region_map["extent"] = req.extent;
  req.region_map["subregion"] = {c - h, c - h, c + h, c + h};
  req.region_map["approach_N"] = {0, side - strip, side, side};
  req.region_map["approach_S"] = {0, 0, side, strip};
  req.region_map["approach_E"] = {side - strip, 0, side, side};
  req.region_map["approach_W"] = {0, 0, strip, side};

  auto within = [&](const std::string& id, const std::string& region) {
    req.constraints.push_back({ConstraintKind::WithinRegion, id, region, 0.0});
  };

  req.actors.push_back({"UAV", Role::UavStart, {}, 1.0, 1.0});
  within("UAV", "approach_" + approach_of(r));

  const int targets = count_param(r, roles::kTargetCount, 1);
  const double concealment = role_number(r.params, r.roles, roles::kTargetConcealment, 1.0);
  if (!(concealment >= 0.0 && concealment <= 1.0)) fail("concealment must lie in [0,1]");
  for (int i = 1; i <= targets; ++i) {
    const std::string id = "T-" + std::to_string(i);
    req.actors.push_back({id, Role::Target, {}, 3.0, concealment});
    within(id, "subregion");
  }

  const auto density = resolve_role(r.params, r.roles, roles::kBystanderDensity);
  const auto proximity = resolve_role(r.params, r.roles, roles::kBystanderProximity);
  const int near_wanted = count_param(r, roles::kProximityCount, kDefaultProximityCount);
  int bystanders = 0;
  if (density) {
    const double per_km2 = role_number(r.params, r.roles, roles::kBystanderDensity, 0.0);
    if (per_km2 < 0) fail("bystander density must be non-negative");
    bystanders = static_cast<int>(std::lround(per_km2 * req.extent.area() / 1.0e6));
  } else if (proximity) {
    bystanders = near_wanted;
  }
  const int near = (proximity && targets > 0) ? std::min(near_wanted, bystanders) : 0;
  const double prox = role_number(r.params, r.roles, roles::kBystanderProximity, 0.0);
  if (near > 0 && !(prox > 0)) fail("bystander proximity must be positive");
  for (int i = 1; i <= bystanders; ++i) {
    const bool is_near = i <= near;
    const std::string id = is_near ? "B-P" + std::to_string(i) : "B-" + std::to_string(i - near);
    req.actors.push_back({id, Role::Bystander, {}, 0.5, 1.0});
    within(id, "extent");
    if (is_near) {
      req.constraints.push_back({ConstraintKind::MinDistance, id, "T-1", prox * (1.0 - kProximityTolerance)});
      req.constraints.push_back({ConstraintKind::MaxDistance, id, "T-1", prox * (1.0 + kProximityTolerance)});
    } else if (near > 0) {
      // Proximity is the nearest-bystander distance, so the background keeps clear of it.
      req.constraints.push_back({ConstraintKind::MinDistance, id, "T-1", prox * (1.0 - kProximityTolerance)});
    }
  }

  const int clutter = count_param(r, roles::kClutterCount, 0);
  for (int i = 1; i <= clutter; ++i) {
    const std::string id = "C-" + std::to_string(i);
    req.actors.push_back({id, Role::Clutter, {}, 2.0, 1.0});
    within(id, "extent");
  }
  return req;
}

Scene place(const SceneRequest& request, std::uint64_t seed, int max_attempts) {
  if (max_attempts < 1) fail("max_attempts must be at least 1");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < request.actors.size(); ++i)
    if (!index.emplace(request.actors[i].id, i).second) fail("duplicate actor id '" + request.actors[i].id + "'");
  for (const auto& c : request.constraints) {
    if (!index.count(c.subject)) fail("constraint " + c.describe() + " names unknown actor '" + c.subject + "'");
    if (c.kind == ConstraintKind::WithinRegion) {
      if (!request.region_map.count(c.reference)) fail("constraint " + c.describe() + " names unknown region");
    } else {
      if (!index.count(c.reference)) fail("constraint " + c.describe() + " names unknown actor '" + c.reference + "'");
      if ((c.kind == ConstraintKind::MinDistance || c.kind == ConstraintKind::MaxDistance) && !(c.value > 0))
        fail("constraint " + c.describe() + " needs a positive distance");
    }
  }

  Scene scene;
  scene.extent = request.extent;
  scene.region_map = request.region_map;
  scene.constraints = request.constraints;
  rng::SplitMix64 gen(seed);
  std::vector<bool> placed(request.actors.size(), false);

  for (std::size_t i = 0; i < request.actors.size(); ++i) {
    Actor actor = request.actors[i];
    Rect box = request.extent;
    std::vector<const PlacementConstraint*> relational;
    for (const auto& c : request.constraints) {
      if (c.kind == ConstraintKind::WithinRegion) {
        if (c.subject == actor.id) box = box.intersect(request.region_map.at(c.reference));
        continue;
      }
      const bool mine = c.subject == actor.id && placed[index.at(c.reference)];
      const bool theirs = c.reference == actor.id && placed[index.at(c.subject)];
      if (mine || theirs) relational.push_back(&c);
      // Distance caps shrink the proposal box to the square around the anchor.
      if ((mine || theirs) && c.kind == ConstraintKind::MaxDistance) {
        const Vec2 a = scene.actors[index.at(mine ? c.reference : c.subject)].position;
        box = box.intersect({a.x - c.value, a.y - c.value, a.x + c.value, a.y + c.value});
      }
    }

    std::map<std::string, int> histogram;
    bool accepted = false;
    if (box.x1 < box.x0 || box.y1 < box.y0) {
      histogram["empty_region(" + actor.id + ")"] = max_attempts;
    } else {
      for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
        actor.position = {gen.uniform(box.x0, box.x1), gen.uniform(box.y0, box.y1)};
        std::string violated;
        for (const auto& other : scene.actors) {
          if (distance(actor.position, other.position) < actor.radius + other.radius) {
            violated = "intersection(" + other.id + "," + actor.id + ")";
            break;
          }
        }
        for (std::size_t k = 0; violated.empty() && k < relational.size(); ++k) {
          const auto& c = *relational[k];
          const Vec2 subject = c.subject == actor.id ? actor.position : scene.actors[index.at(c.subject)].position;
          const Vec2 ref = c.reference == actor.id ? actor.position : scene.actors[index.at(c.reference)].position;
          const double d = distance(subject, ref);
          bool ok = true;
          switch (c.kind) {
            case ConstraintKind::MinDistance:
              ok = d >= c.value;
              break;
            case ConstraintKind::MaxDistance:
              ok = d <= c.value;
              break;
            case ConstraintKind::HeadingFrom: {
              const double diff = std::fabs(std::fmod(bearing_deg(ref, subject) - c.value + 540.0, 360.0) - 180.0);
              ok = diff <= kHeadingTolerance;
              break;
            }
            case ConstraintKind::WithinRegion:
              break;
          }
          if (!ok) violated = c.describe();
        }
        if (violated.empty()) {
          accepted = true;
        } else {
          ++histogram[violated];
        }
      }
    }
    if (!accepted) {
      std::string msg = "placement unsatisfiable for actor " + actor.id + " after " + std::to_string(max_attempts) +
                        " attempts; first violations:";
      for (const auto& [what, n] : histogram) msg += " " + what + "x" + std::to_string(n);
      throw Error(ErrorKind::Unsatisfiable, msg);
    }
    placed[i] = true;
    scene.actors.push_back(std::move(actor));
  }
  return scene;
}

Scene place(const orchestrator::Realization& realization, std::span<const PlacementConstraint> constraints,
            int max_attempts) {
  SceneRequest req = layout_for(realization);
  req.constraints.insert(req.constraints.end(), constraints.begin(), constraints.end());
  return place(req, realization.seed, max_attempts);
}

std::vector<std::string> verify(const Scene& scene, std::span<const PlacementConstraint> constraints) {
  std::vector<std::string> out;
  const auto& actors = scene.actors;
  for (const auto& a : actors)
    if (!scene.extent.contains(a.position)) out.push_back("outside_extent(" + a.id + ")");
  for (std::size_t i = 0; i < actors.size(); ++i) {
    for (std::size_t j = i + 1; j < actors.size(); ++j) {
      const double dx = actors[i].position.x - actors[j].position.x;
      const double dy = actors[i].position.y - actors[j].position.y;
      if (std::hypot(dx, dy) < actors[i].radius + actors[j].radius)
        out.push_back("intersection(" + actors[i].id + "," + actors[j].id + ")");
    }
  }
  for (const auto& c : constraints) {
    const Actor* subject = scene.find(c.subject);
    if (!subject) {
      out.push_back("unknown_actor(" + c.subject + ")");
      continue;
    }
    if (c.kind == ConstraintKind::WithinRegion) {
      auto it = scene.region_map.find(c.reference);
      if (it == scene.region_map.end()) {
        out.push_back("unknown_region(" + c.reference + ")");
      } else if (!it->second.contains(subject->position)) {
        out.push_back(c.describe());
      }
      continue;
    }
    const Actor* ref = scene.find(c.reference);
    if (!ref) {
      out.push_back("unknown_actor(" + c.reference + ")");
      continue;
    }
    const double d = std::hypot(subject->position.x - ref->position.x, subject->position.y - ref->position.y);
    bool ok = true;
    if (c.kind == ConstraintKind::MinDistance) ok = d >= c.value;
    if (c.kind == ConstraintKind::MaxDistance) ok = d <= c.value;
    if (c.kind == ConstraintKind::HeadingFrom) {
      double diff = std::fabs(bearing_deg(ref->position, subject->position) - c.value);
      diff = std::min(diff, 360.0 - diff);
      ok = diff <= kHeadingTolerance;
    }
    if (!ok) out.push_back(c.describe());
  }
  return out;
}

json to_json(const Scene& scene) {
  json regions = json::object();
  for (const auto& [name, r] : scene.region_map) regions[name] = rect_to_json(r);
  json actors = json::array();
  for (const auto& a : scene.actors)
    actors.push_back({{"id", a.id},
                      {"role", to_string(a.role)},
                      {"x", a.position.x},
                      {"y", a.position.y},
                      {"radius", a.radius},
                      {"concealment", a.concealment}});
  json constraints = json::array();
  for (const auto& c : scene.constraints) constraints.push_back(rebar::to_json(c));
  return {{"extent", rect_to_json(scene.extent)}, {"regions", regions}, {"actors", actors}, {"constraints", constraints}};
}

Scene scene_from_json(const json& j) {
  Scene s;
  try {
    s.extent = rect_from_json(j.at("extent"));
    const json regions = j.value("regions", json::object());
    for (const auto& [name, r] : regions.items()) s.region_map[name] = rect_from_json(r);
    for (const auto& a : j.at("actors")) {
      s.actors.push_back({a.at("id").get<std::string>(),
                          role_from_string(a.at("role").get<std::string>()),
                          {json_number(a, "x"), json_number(a, "y")},
                          a.value("radius", 1.0),
                          a.value("concealment", 1.0)});
    }
    for (const auto& c : j.value("constraints", json::array())) s.constraints.push_back(constraint_from_json(c));
  } catch (const json::exception& e) {
    fail(std::string("malformed scene: ") + e.what());
  }
  return s;
}

}  // namespace rebar::scene
