#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/rng.hpp"
#include "rebar/scene.hpp"

namespace rebar::orchestrator {
struct Realization;
}

namespace rebar::sim {

using scene::Vec2;

struct Weather {
  double rain_level = 0.0;             // 0..9
  double fog_level = 0.0;              // 0..9
  double hours_till_solar_noon = 0.0;  // 0..8
};

/// Conditions under which the surrogate agent marks a target.
struct Engagement {
  double conf_floor = 0.35;
  int consecutive_frames = 3;  // k
  int min_viewpoints = 2;      // m distinct 45-degree bearing sectors
  double bystander_safety_radius_m = 50.0;  // 0 disables the bystander check
};

/// Parametric stand-in for a perception pipeline.
///
///   p_detect   = p_base * g_rain * g_fog * g_sun * g_alt * concealment
///   g_f        = 1 - (1 - g_min) * t_f,  t_f = position of the factor between
///                its easiest and hardest calibration value (rain 0..9, fog 0..9,
///                hours 0..8, altitude 500..6000 m), clamped to [0,1]
///   confidence = clamp(0.2 + 0.75 * A + conf_spread * (2u - 1), 0, 1) with
///                A = g_rain * g_fog * g_sun * g_alt * concealment
///   p_mis      = p_mis_min + (p_mis_max - p_mis_min) * mean(t_f)
///
/// Every detection consumes exactly three uniforms (detect, confidence, label).
struct DetectionModel {
  double p_base = 0.95;
  double g_min = 0.2;
  double p_mis_min = 0.02;
  double p_mis_max = 0.25;
  double conf_spread = 0.15;
  bool ground_truth = false;  // perfect perception: always detected, confidence 1, true label
};

struct SimConfig {
  double tick_s = 1.0;
  double duration_s = 600.0;
  double uav_speed_mps = 15.0;
  double uav_altitude_m = 500.0;
  double sensor_fov_halfangle_deg = 10.0;
  double lane_overlap = 0.1;  // fraction of the swath shared by adjacent lanes
  Weather weather;
  Engagement engagement;
  DetectionModel detection;

  /// Throws if any invariant fails.
  void validate() const;
  double footprint_radius() const;
  double swath() const { return 2.0 * footprint_radius(); }
};

/// Weather and altitude come from the realization's parameters; everything
/// else from defaults overlaid with `overrides` (a partial SimConfig object).
SimConfig config_for(const orchestrator::Realization& realization, const json& overrides = json::object());
SimConfig apply_overrides(SimConfig config, const json& overrides);

json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const json& j);

struct Attenuation {
  double rain = 1.0, fog = 1.0, sun = 1.0, altitude = 1.0;
  double severity = 0.0;  // mean normalized factor position in [0,1]
  double product() const { return rain * fog * sun * altitude; }
};

Attenuation attenuation(const Weather& weather, double altitude_m, const DetectionModel& model);
double detection_probability(const Weather& weather, double altitude_m, double concealment,
                             const DetectionModel& model);
double misclassification_probability(const Weather& weather, double altitude_m, const DetectionModel& model);

struct UavState {
  Vec2 position;
  double altitude_m = 500.0;
};

struct DetectionEvent {
  std::string actor_id;
  scene::Role true_role = scene::Role::Clutter;
  std::string reported_label;  // target | bystander | clutter | unknown
  double confidence = 0.0;
  double bearing_deg = 0.0;    // from the UAV to the actor
  double range_m = 0.0;
};

/// One Bernoulli detection draw for an actor inside the footprint.
std::optional<DetectionEvent> detect(const scene::Actor& actor, const UavState& uav, const Weather& weather,
                                     double concealment, rng::CounterStream& stream, const DetectionModel& model);

enum class DecisionKind { GotoSubregion, BeginSearch, MarkTarget, SuppressMark, Complete };

std::string_view to_string(DecisionKind kind);

struct DecisionEvent {
  DecisionKind kind = DecisionKind::GotoSubregion;
  std::optional<std::string> subject;
  std::string reason;
};

struct TickRecord {
  std::int64_t index = 0;
  double t_s = 0.0;
  Vec2 uav_pos;
  std::string uav_stage;             // transit | search | done
  std::vector<std::string> in_view;  // ground truth: actors inside the footprint
  std::vector<DetectionEvent> detections;
  std::vector<DecisionEvent> decisions;
};

enum class Outcome { Completed, Timeout, Aborted };

std::string_view to_string(Outcome outcome);

struct RunLog {
  std::string realization_id;
  std::uint64_t seed = 0;
  ParamMap params;
  std::optional<scene::Scene> scene;
  std::optional<SimConfig> config;
  std::vector<TickRecord> ticks;
  std::optional<Outcome> outcome;  // absent when the footer is missing
};

/// 45-degree sector (0..7) of the bearing from the actor back to the UAV.
int viewpoint_bin(double uav_to_actor_bearing_deg);

/// Boustrophedon waypoints over `region` with the given lane spacing, lanes
/// perpendicular to the direction of arrival and starting at the corner
/// nearest `from`.
std::vector<Vec2> lawnmower(const scene::Rect& region, double lane_spacing, Vec2 from);

/// Flies to the cued subregion, sweeps it with a lawnmower pattern, and marks
/// targets that meet the engagement conditions unless a perceived bystander
/// is within the safety radius. Deterministic in (scene, config, seed).
RunLog run(const scene::Scene& scene, const SimConfig& config, std::uint64_t seed,
           std::string_view realization_id = "run");

/// Line-delimited records: a header, one record per tick, a footer.
std::string serialize(const RunLog& log);
RunLog parse_run_log(std::string_view text);

}  // namespace rebar::sim
