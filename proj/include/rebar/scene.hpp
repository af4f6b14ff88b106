#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/constraint.hpp"

namespace rebar::orchestrator {
struct Realization;
}

namespace rebar::scene {

struct Vec2 {
  double x = 0.0, y = 0.0;
  bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Compass bearing in degrees [0, 360) from `from` to `to`: north 0, east 90.
double bearing_deg(Vec2 from, Vec2 to);

/// Axis-aligned rectangle; origin at the south-west corner, x east, y north.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool empty() const { return !(x1 > x0 && y1 > y0); }
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  Rect intersect(const Rect& o) const;
  bool operator==(const Rect&) const = default;
};

enum class Role { UavStart, Target, Bystander, Clutter };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Actor {
  std::string id;
  Role role = Role::Clutter;
  Vec2 position;
  double radius = 1.0;
  double concealment = 1.0;  // detection multiplier in [0,1]; 1 = fully exposed
};

struct Scene {
  Rect extent;
  std::vector<Actor> actors;
  std::map<std::string, Rect> region_map;
  std::vector<PlacementConstraint> constraints;

  const Actor* find(std::string_view id) const;
};

/// Unplaced actors plus the rules that govern their placement.
struct SceneRequest {
  Rect extent;
  std::map<std::string, Rect> region_map;
  std::vector<Actor> actors;  // positions ignored; placed in this order
  std::vector<PlacementConstraint> constraints;
};

/// Canonical roles that scenario parameters can be bound to. A parameter binds
/// to a role through the base spec's role map, by being named after the role,
/// or through the built-in alias list (e.g. "Rain level" -> rain_level).
namespace roles {
inline constexpr std::string_view kRainLevel = "rain_level";
inline constexpr std::string_view kFogLevel = "fog_level";
inline constexpr std::string_view kHoursTillSolarNoon = "hours_till_solar_noon";
inline constexpr std::string_view kUavAltitude = "uav_altitude";
inline constexpr std::string_view kUavApproach = "uav_approach";
inline constexpr std::string_view kTargetCount = "target_count";
inline constexpr std::string_view kTargetConcealment = "target_concealment";
inline constexpr std::string_view kBystanderDensity = "bystander_density";
inline constexpr std::string_view kBystanderProximity = "bystander_proximity";
inline constexpr std::string_view kProximityCount = "proximity_count";
inline constexpr std::string_view kClutterCount = "clutter_count";
inline constexpr std::string_view kSceneExtent = "scene_extent";
inline constexpr std::string_view kSubregionSize = "subregion_size";
}  // namespace roles

std::optional<Scalar> resolve_role(const ParamMap& params, const std::map<std::string, std::string>& role_map,
                                   std::string_view role);
double role_number(const ParamMap& params, const std::map<std::string, std::string>& role_map,
                   std::string_view role, double fallback);

/// Layout defaults, meters.
inline constexpr double kDefaultExtent = 800.0;
inline constexpr double kDefaultSubregion = 300.0;
inline constexpr double kProximityTolerance = 0.05;
inline constexpr int kDefaultProximityCount = 3;
inline constexpr int kDefaultMaxAttempts = 10000;

/// Builds the actor list, regions and constraints implied by a realization's
/// parameters. Bystander count is the density (persons per km^2) times the
/// extent area, rounded; the first `proximity_count` of them are held within
/// +-5% of the proximity distance from the first target and the rest stay
/// at least that far away.
SceneRequest layout_for(const orchestrator::Realization& realization);

/// Rejection sampling: each actor in order is proposed uniformly within its
/// regions, narrowed to the square around any placed actor it has a distance
/// cap to, until it satisfies non-intersection and every constraint against
/// already placed actors. Deterministic in `seed`. Throws an Unsatisfiable
/// error carrying the histogram of first-violated constraints.
Scene place(const SceneRequest& request, std::uint64_t seed, int max_attempts = kDefaultMaxAttempts);

Scene place(const orchestrator::Realization& realization, std::span<const PlacementConstraint> constraints,
            int max_attempts = kDefaultMaxAttempts);

/// Independent re-check of extent membership, pairwise non-intersection and
/// the given constraints. Empty means valid.
std::vector<std::string> verify(const Scene& scene, std::span<const PlacementConstraint> constraints);
inline std::vector<std::string> verify(const Scene& scene) { return verify(scene, scene.constraints); }

json to_json(const Scene& scene);
Scene scene_from_json(const json& j);

}  // namespace rebar::scene
