#include "rebar/sim.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>

#include "rebar/orchestrator.hpp"

namespace rebar::sim {

namespace {

constexpr double kRainHard = 9.0;
constexpr double kFogHard = 9.0;
constexpr double kHoursHard = 8.0;
constexpr double kAltitudeEasy = 500.0;
constexpr double kAltitudeHard = 6000.0;

double unit_position(double v, double easy, double hard) { return std::clamp((v - easy) / (hard - easy), 0.0, 1.0); }

std::string_view label_of(scene::Role role) {
  switch (role) {
    case scene::Role::Target:
      return "target";
    case scene::Role::Bystander:
      return "bystander";
    default:
      return "clutter";
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) fail(where + " overrides must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail("unknown " + where + " override '" + k + "'");
}

json decision_to_json(const DecisionEvent& d) {
  json j{{"kind", to_string(d.kind)}, {"reason", d.reason}};
  if (d.subject) j["subject"] = *d.subject;
  return j;
}

DecisionKind decision_kind_from_string(std::string_view s) {
  for (auto k : {DecisionKind::GotoSubregion, DecisionKind::BeginSearch, DecisionKind::MarkTarget,
                 DecisionKind::SuppressMark, DecisionKind::Complete})
    if (to_string(k) == s) return k;
  fail("unknown decision kind '" + std::string(s) + "'");
}

Outcome outcome_from_string(std::string_view s) {
  for (auto o : {Outcome::Completed, Outcome::Timeout, Outcome::Aborted})
    if (to_string(o) == s) return o;
  fail("unknown outcome '" + std::string(s) + "'");
}

struct Track {
  std::int64_t last_qualifying = -2;
  int streak = 0;
  std::bitset<8> bins;
  Vec2 estimate;
  bool ever_bystander = false;
  bool marked = false;
  bool suppressed = false;
};

}  // namespace

void SimConfig::validate() const {
  if (!(tick_s > 0)) fail("tick_s must be positive");
  if (!(duration_s >= tick_s)) fail("duration_s must be at least tick_s");
  if (!(uav_speed_mps > 0)) fail("uav_speed_mps must be positive");
  if (!(uav_altitude_m > 0)) fail("uav_altitude_m must be positive");
  if (!(sensor_fov_halfangle_deg > 0 && sensor_fov_halfangle_deg < 90)) fail("fov half-angle must lie in (0, 90)");
  if (!(lane_overlap >= 0 && lane_overlap < 1)) fail("lane_overlap must lie in [0, 1)");
  if (!(engagement.conf_floor >= 0 && engagement.conf_floor <= 1)) fail("conf_floor must lie in [0,1]");
  if (engagement.consecutive_frames < 1) fail("consecutive_frames must be at least 1");
  if (engagement.min_viewpoints < 1 || engagement.min_viewpoints > 8) fail("min_viewpoints must lie in [1, 8]");
  if (!(engagement.bystander_safety_radius_m >= 0)) fail("bystander_safety_radius_m must be non-negative");
  const auto& d = detection;
  if (!(d.p_base >= 0 && d.p_base <= 1)) fail("p_base must lie in [0,1]");
  if (!(d.g_min >= 0 && d.g_min <= 1)) fail("g_min must lie in [0,1]");
  if (!(d.p_mis_min >= 0 && d.p_mis_min <= d.p_mis_max && d.p_mis_max <= 1)) fail("p_mis range invalid");
  if (!(d.conf_spread >= 0)) fail("conf_spread must be non-negative");
}

double SimConfig::footprint_radius() const {
  return uav_altitude_m * std::tan(sensor_fov_halfangle_deg * std::numbers::pi / 180.0);
}

SimConfig apply_overrides(SimConfig c, const json& o) {
  if (o.is_null()) return c;
  check_keys(o,
             {"tick_s", "duration_s", "uav_speed_mps", "sensor_fov_halfangle_deg", "lane_overlap", "engagement",
              "detection"},
             "sim");
  try {
    read_if(o, "tick_s", c.tick_s);
    read_if(o, "duration_s", c.duration_s);
    read_if(o, "uav_speed_mps", c.uav_speed_mps);
    read_if(o, "sensor_fov_halfangle_deg", c.sensor_fov_halfangle_deg);
    read_if(o, "lane_overlap", c.lane_overlap);
    if (o.contains("engagement")) {
      const auto& e = o.at("engagement");
      check_keys(e, {"conf_floor", "consecutive_frames", "min_viewpoints", "bystander_safety_radius_m"}, "engagement");
      read_if(e, "conf_floor", c.engagement.conf_floor);
      read_if(e, "consecutive_frames", c.engagement.consecutive_frames);
      read_if(e, "min_viewpoints", c.engagement.min_viewpoints);
      read_if(e, "bystander_safety_radius_m", c.engagement.bystander_safety_radius_m);
    }
    if (o.contains("detection")) {
      const auto& d = o.at("detection");
      check_keys(d, {"p_base", "g_min", "p_mis_min", "p_mis_max", "conf_spread", "ground_truth"}, "detection");
      read_if(d, "p_base", c.detection.p_base);
      read_if(d, "g_min", c.detection.g_min);
      read_if(d, "p_mis_min", c.detection.p_mis_min);
      read_if(d, "p_mis_max", c.detection.p_mis_max);
      read_if(d, "conf_spread", c.detection.conf_spread);
      read_if(d, "ground_truth", c.detection.ground_truth);
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed sim overrides: ") + e.what());
  }
  c.validate();
  return c;
}

SimConfig config_for(const orchestrator::Realization& r, const json& overrides) {
  SimConfig c;
  c.weather.rain_level = scene::role_number(r.params, r.roles, scene::roles::kRainLevel, 0.0);
  c.weather.fog_level = scene::role_number(r.params, r.roles, scene::roles::kFogLevel, 0.0);
  c.weather.hours_till_solar_noon = scene::role_number(r.params, r.roles, scene::roles::kHoursTillSolarNoon, 0.0);
  c.uav_altitude_m = scene::role_number(r.params, r.roles, scene::roles::kUavAltitude, 500.0);
  return apply_overrides(c, overrides);
}

json to_json(const SimConfig& c) {
  return {{"tick_s", c.tick_s},
          {"duration_s", c.duration_s},
          {"uav_speed_mps", c.uav_speed_mps},
          {"uav_altitude_m", c.uav_altitude_m},
          {"sensor_fov_halfangle_deg", c.sensor_fov_halfangle_deg},
          {"lane_overlap", c.lane_overlap},
          {"weather",
           {{"rain_level", c.weather.rain_level},
            {"fog_level", c.weather.fog_level},
            {"hours_till_solar_noon", c.weather.hours_till_solar_noon}}},
          {"engagement",
           {{"conf_floor", c.engagement.conf_floor},
            {"consecutive_frames", c.engagement.consecutive_frames},
            {"min_viewpoints", c.engagement.min_viewpoints},
            {"bystander_safety_radius_m", c.engagement.bystander_safety_radius_m}}},
          {"detection",
           {{"p_base", c.detection.p_base},
            {"g_min", c.detection.g_min},
            {"p_mis_min", c.detection.p_mis_min},
            {"p_mis_max", c.detection.p_mis_max},
            {"conf_spread", c.detection.conf_spread},
            {"ground_truth", c.detection.ground_truth}}}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  try {
    read_if(j, "uav_altitude_m", c.uav_altitude_m);
    if (j.contains("weather")) {
      const auto& w = j.at("weather");
      read_if(w, "rain_level", c.weather.rain_level);
      read_if(w, "fog_level", c.weather.fog_level);
      read_if(w, "hours_till_solar_noon", c.weather.hours_till_solar_noon);
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed sim config: ") + e.what());
  }
  json rest = j;
  rest.erase("uav_altitude_m");
  rest.erase("weather");
  return apply_overrides(c, rest);
}

Attenuation attenuation(const Weather& w, double altitude_m, const DetectionModel& m) {
  const double t_rain = unit_position(w.rain_level, 0.0, kRainHard);
  const double t_fog = unit_position(w.fog_level, 0.0, kFogHard);
  const double t_sun = unit_position(w.hours_till_solar_noon, 0.0, kHoursHard);
  const double t_alt = unit_position(altitude_m, kAltitudeEasy, kAltitudeHard);
  auto g = [&](double t) { return 1.0 - (1.0 - m.g_min) * t; };
  Attenuation a;
  a.rain = g(t_rain);
  a.fog = g(t_fog);
  a.sun = g(t_sun);
  a.altitude = g(t_alt);
  a.severity = (t_rain + t_fog + t_sun + t_alt) / 4.0;
  return a;
}

double detection_probability(const Weather& w, double altitude_m, double concealment, const DetectionModel& m) {
  return m.p_base * attenuation(w, altitude_m, m).product() * concealment;
}

double misclassification_probability(const Weather& w, double altitude_m, const DetectionModel& m) {
  return m.p_mis_min + (m.p_mis_max - m.p_mis_min) * attenuation(w, altitude_m, m).severity;
}

std::optional<DetectionEvent> detect(const scene::Actor& actor, const UavState& uav, const Weather& weather,
                                     double concealment, rng::CounterStream& stream, const DetectionModel& model) {
  const double u_detect = stream.uniform();
  const double u_conf = stream.uniform();
  const double u_label = stream.uniform();

  DetectionEvent ev;
  ev.actor_id = actor.id;
  ev.true_role = actor.role;
  ev.bearing_deg = round_to(scene::bearing_deg(uav.position, actor.position), 4);
  if (ev.bearing_deg >= 360.0) ev.bearing_deg = 0.0;
  ev.range_m = round_to(scene::distance(uav.position, actor.position), 3);

  if (model.ground_truth) {
    ev.reported_label = label_of(actor.role);
    ev.confidence = 1.0;
    return ev;
  }
  const auto a = attenuation(weather, uav.altitude_m, model);
  const double p = model.p_base * a.product() * concealment;
  if (!(u_detect < p)) return std::nullopt;

  const double center = 0.2 + 0.75 * a.product() * concealment;
  ev.confidence = round_to(std::clamp(center + model.conf_spread * (2.0 * u_conf - 1.0), 0.0, 1.0), 6);

  const double p_mis = model.p_mis_min + (model.p_mis_max - model.p_mis_min) * a.severity;
  const bool flip = u_label < p_mis;
  switch (actor.role) {
    case scene::Role::Target:
      ev.reported_label = flip ? "bystander" : "target";
      break;
    case scene::Role::Bystander:
      ev.reported_label = flip ? "target" : "bystander";
      break;
    default:
      ev.reported_label = flip ? "unknown" : "clutter";
      break;
  }
  return ev;
}

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::GotoSubregion:
      return "goto_subregion";
    case DecisionKind::BeginSearch:
      return "begin_search";
    case DecisionKind::MarkTarget:
      return "mark_target";
    case DecisionKind::SuppressMark:
      return "suppress_mark";
    case DecisionKind::Complete:
      return "complete";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed:
      return "completed";
    case Outcome::Timeout:
      return "timeout";
    case Outcome::Aborted:
      return "aborted";
  }
  return "?";
}

int viewpoint_bin(double uav_to_actor_bearing_deg) {
  double back = std::fmod(uav_to_actor_bearing_deg + 180.0, 360.0);
  if (back < 0) back += 360.0;
  return std::clamp(static_cast<int>(back / 45.0), 0, 7);
}

std::vector<Vec2> lawnmower(const scene::Rect& region, double lane_spacing, Vec2 from) {
  if (!(lane_spacing > 0)) fail("lane spacing must be positive");
  const Vec2 c = region.center();
  const bool east_west_lanes = std::fabs(from.y - c.y) >= std::fabs(from.x - c.x);
  const double cross = east_west_lanes ? region.height() : region.width();
  const int lanes = std::max(1, static_cast<int>(std::ceil(cross / lane_spacing - 1e-9)));
  const double step = cross / lanes;

  std::vector<Vec2> out;
  if (east_west_lanes) {
    const bool from_south = from.y < c.y;
    bool eastward = from.x <= c.x;
    for (int i = 0; i < lanes; ++i) {
      const double off = (i + 0.5) * step;
      const double y = from_south ? region.y0 + off : region.y1 - off;
      out.push_back({eastward ? region.x0 : region.x1, y});
      out.push_back({eastward ? region.x1 : region.x0, y});
      eastward = !eastward;
    }
  } else {
    const bool from_west = from.x < c.x;
    bool northward = from.y <= c.y;
    for (int i = 0; i < lanes; ++i) {
      const double off = (i + 0.5) * step;
      const double x = from_west ? region.x0 + off : region.x1 - off;
      out.push_back({x, northward ? region.y0 : region.y1});
      out.push_back({x, northward ? region.y1 : region.y0});
      northward = !northward;
    }
  }
  return out;
}

RunLog run(const scene::Scene& scene, const SimConfig& config, std::uint64_t seed, std::string_view realization_id) {
  config.validate();
  RunLog log;
  log.realization_id = std::string(realization_id);
  log.seed = seed;
  log.scene = scene;
  log.config = config;

  const scene::Actor* start = nullptr;
  std::size_t target_count = 0;
  for (const auto& a : scene.actors) {
    if (a.role == scene::Role::UavStart && !start) start = &a;
    if (a.role == scene::Role::Target) ++target_count;
  }
  if (!start) {
    log.outcome = Outcome::Aborted;
    return log;
  }
  auto sub_it = scene.region_map.find("subregion");
  const scene::Rect subregion = sub_it != scene.region_map.end() ? sub_it->second : scene.extent;

  const auto& eng = config.engagement;
  const double radius = config.footprint_radius();
  const double spacing = config.swath() * (1.0 - config.lane_overlap);
  const auto last_tick = static_cast<std::int64_t>(std::floor(config.duration_s / config.tick_s + 1e-9));

  Vec2 pos = start->position;
  std::deque<Vec2> route;
  for (const auto& w : lawnmower(subregion, spacing, pos)) route.push_back(w);
  bool in_transit = true;
  std::string stage = "transit";
  std::vector<DecisionEvent> pending{{DecisionKind::GotoSubregion, std::nullopt, "cue:subregion"}};
  bool finish_next = false;

  std::map<std::string, Track> tracks;
  std::size_t marks = 0;

  for (std::int64_t i = 0; i <= last_tick; ++i) {
    TickRecord rec;
    rec.index = i;
    rec.t_s = static_cast<double>(i) * config.tick_s;
    rec.uav_pos = {round_to(pos.x, 3), round_to(pos.y, 3)};
    rec.uav_stage = stage;
    rec.decisions = std::move(pending);
    pending.clear();

    const UavState uav{pos, config.uav_altitude_m};
    for (const auto& actor : scene.actors) {
      if (actor.role == scene::Role::UavStart) continue;
      if (scene::distance(pos, actor.position) > radius) continue;
      rec.in_view.push_back(actor.id);
      rng::CounterStream stream(seed, static_cast<std::uint64_t>(i), actor.id);
      if (auto ev = detect(actor, uav, config.weather, actor.concealment, stream, config.detection))
        rec.detections.push_back(std::move(*ev));
    }

    for (const auto& ev : rec.detections) {
      auto& tr = tracks[ev.actor_id];
      const double b = ev.bearing_deg * std::numbers::pi / 180.0;
      tr.estimate = {pos.x + ev.range_m * std::sin(b), pos.y + ev.range_m * std::cos(b)};
      if (ev.reported_label == "bystander") tr.ever_bystander = true;
      if (ev.confidence >= eng.conf_floor && ev.reported_label == "target") {
        tr.streak = tr.last_qualifying == i - 1 ? tr.streak + 1 : 1;
        tr.last_qualifying = i;
        tr.bins.set(static_cast<std::size_t>(viewpoint_bin(ev.bearing_deg)));
      }
    }

    for (auto& [id, tr] : tracks) {
      if (tr.marked || tr.last_qualifying != i || tr.streak < eng.consecutive_frames ||
          static_cast<int>(tr.bins.count()) < eng.min_viewpoints)
        continue;
      bool bystander_near = false;
      if (eng.bystander_safety_radius_m > 0) {
        for (const auto& [other_id, other] : tracks) {
          if (other_id == id || !other.ever_bystander) continue;
          if (scene::distance(other.estimate, tr.estimate) <= eng.bystander_safety_radius_m) {
            bystander_near = true;
            break;
          }
        }
      }
      if (bystander_near) {
        if (!tr.suppressed) rec.decisions.push_back({DecisionKind::SuppressMark, id, "bystander_proximity"});
        tr.suppressed = true;
      } else {
        rec.decisions.push_back({DecisionKind::MarkTarget, id, "engagement_conditions_met"});
        tr.marked = true;
        ++marks;
      }
    }

    const bool all_marked = target_count > 0 && marks >= target_count;
    if (finish_next || all_marked) {
      if (!finish_next) rec.decisions.push_back({DecisionKind::Complete, std::nullopt, "all_targets_marked"});
      log.ticks.push_back(std::move(rec));
      log.outcome = Outcome::Completed;
      return log;
    }
    log.ticks.push_back(std::move(rec));

    double budget = config.uav_speed_mps * config.tick_s;
    while (budget > 0 && !route.empty()) {
      const Vec2 next = route.front();
      const double d = scene::distance(pos, next);
      if (d <= budget) {
        pos = next;
        budget -= d;
        route.pop_front();
        if (in_transit) {
          in_transit = false;
          stage = "search";
          pending.push_back({DecisionKind::BeginSearch, std::nullopt, "sweep"});
        }
        if (route.empty()) {
          if (marks > 0) {
            pending.push_back({DecisionKind::Complete, std::nullopt, "sweep_complete"});
            finish_next = true;
            break;
          }
          for (const auto& w : lawnmower(subregion, spacing, pos)) route.push_back(w);
          pending.push_back({DecisionKind::BeginSearch, std::nullopt, "resweep"});
        }
      } else {
        pos.x += (next.x - pos.x) * budget / d;
        pos.y += (next.y - pos.y) * budget / d;
        budget = 0;
      }
    }
    if (finish_next) stage = "done";
  }
  log.outcome = Outcome::Timeout;
  return log;
}

std::string serialize(const RunLog& log) {
  std::string out;
  json header{{"record", "header"}, {"realization_id", log.realization_id}, {"seed", log.seed},
              {"params", params_to_json(log.params)}};
  header["scene"] = log.scene ? scene::to_json(*log.scene) : json(nullptr);
  header["config"] = log.config ? to_json(*log.config) : json(nullptr);
  out += header.dump() + "\n";
  for (const auto& t : log.ticks) {
    json dets = json::array();
    for (const auto& d : t.detections)
      dets.push_back({{"actor_id", d.actor_id},
                      {"true_role", scene::to_string(d.true_role)},
                      {"reported_label", d.reported_label},
                      {"confidence", d.confidence},
                      {"bearing_deg", d.bearing_deg},
                      {"range_m", d.range_m}});
    json decs = json::array();
    for (const auto& d : t.decisions) decs.push_back(decision_to_json(d));
    json rec{{"record", "tick"},
             {"i", t.index},
             {"t_s", t.t_s},
             {"uav_pos", {t.uav_pos.x, t.uav_pos.y}},
             {"uav_stage", t.uav_stage},
             {"in_view", t.in_view},
             {"detections", dets},
             {"decisions", decs}};
    out += rec.dump() + "\n";
  }
  if (log.outcome) {
    json footer{{"record", "footer"}, {"outcome", to_string(*log.outcome)}, {"n_ticks", log.ticks.size()}};
    out += footer.dump() + "\n";
  }
  return out;
}

RunLog parse_run_log(std::string_view text) {
  RunLog log;
  bool have_header = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (log.outcome) fail("run log has records after the footer");
    try {
      const json j = json::parse(line);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "header") {
        if (have_header) fail("run log has two headers");
        have_header = true;
        log.realization_id = j.at("realization_id").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.params = params_from_json(j.value("params", json::object()));
        if (j.contains("scene") && !j.at("scene").is_null()) log.scene = scene::scene_from_json(j.at("scene"));
        if (j.contains("config") && !j.at("config").is_null()) log.config = sim_config_from_json(j.at("config"));
      } else if (kind == "tick") {
        if (!have_header) fail("run log tick before header");
        TickRecord t;
        t.index = j.at("i").get<std::int64_t>();
        t.t_s = j.at("t_s").get<double>();
        if (!log.ticks.empty() && !(t.t_s > log.ticks.back().t_s)) fail("run log ticks not strictly increasing");
        t.uav_pos = {j.at("uav_pos").at(0).get<double>(), j.at("uav_pos").at(1).get<double>()};
        t.uav_stage = j.at("uav_stage").get<std::string>();
        t.in_view = j.at("in_view").get<std::vector<std::string>>();
        for (const auto& d : j.at("detections")) {
          DetectionEvent ev;
          ev.actor_id = d.at("actor_id").get<std::string>();
          ev.true_role = scene::role_from_string(d.at("true_role").get<std::string>());
          ev.reported_label = d.at("reported_label").get<std::string>();
          ev.confidence = d.at("confidence").get<double>();
          ev.bearing_deg = d.at("bearing_deg").get<double>();
          ev.range_m = d.at("range_m").get<double>();
          t.detections.push_back(std::move(ev));
        }
        for (const auto& d : j.at("decisions")) {
          DecisionEvent ev;
          ev.kind = decision_kind_from_string(d.at("kind").get<std::string>());
          if (d.contains("subject")) ev.subject = d.at("subject").get<std::string>();
          ev.reason = d.value("reason", std::string{});
          t.decisions.push_back(std::move(ev));
        }
        log.ticks.push_back(std::move(t));
      } else if (kind == "footer") {
        log.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        if (j.value("n_ticks", log.ticks.size()) != log.ticks.size()) fail("run log footer tick count mismatch");
      } else {
        fail("unknown run log record '" + kind + "'");
      }
    } catch (const json::exception& e) {
      fail("malformed run log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) fail("run log has no header");
  return log;
}

}  // namespace rebar::sim
