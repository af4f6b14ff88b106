#include "rebar/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace rebar {

namespace {
constexpr std::pair<ConstraintKind, std::string_view> kConstraintNames[] = {
    {ConstraintKind::WithinRegion, "within_region"},
    {ConstraintKind::MinDistance, "min_distance"},
    {ConstraintKind::MaxDistance, "max_distance"},
    {ConstraintKind::HeadingFrom, "heading_from"},
};
}  // namespace

std::string_view to_string(ConstraintKind kind) {
  for (auto [k, name] : kConstraintNames)
    if (k == kind) return name;
  return "?";
}

ConstraintKind constraint_kind_from_string(std::string_view text) {
  for (auto [k, name] : kConstraintNames)
    if (name == text) return k;
  fail("unknown constraint kind '" + std::string(text) + "'");
}

std::string PlacementConstraint::describe() const {
  return std::string(to_string(kind)) + "(" + subject + "," + reference + ")";
}

json to_json(const PlacementConstraint& c) {
  return {{"kind", to_string(c.kind)}, {"subject", c.subject}, {"reference", c.reference}, {"value", c.value}};
}

PlacementConstraint constraint_from_json(const json& j) {
  PlacementConstraint c;
  c.kind = constraint_kind_from_string(j.at("kind").get<std::string>());
  c.subject = j.at("subject").get<std::string>();
  c.reference = j.at("reference").get<std::string>();
  c.value = j.value("value", 0.0);
  return c;
}

}  // namespace rebar

namespace rebar::scenario {

namespace {

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-' || c == '\'' || u >= 0x80;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Up to three words after `pos`, stopping at punctuation, brackets or a line end.
std::string words_after(std::string_view text, std::size_t pos) {
  std::vector<std::string> words;
  std::size_t i = pos;
  while (i < text.size() && words.size() < 3) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size() || !word_char(text[i])) break;
    std::size_t start = i;
    while (i < text.size() && word_char(text[i])) ++i;
    words.emplace_back(text.substr(start, i - start));
  }
  std::string name;
  for (const auto& w : words) name += (name.empty() ? "" : "_") + lower(w);
  return name;
}

std::string word_before(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) --i;
  std::size_t end = i;
  while (i > 0 && word_char(text[i - 1])) --i;
  return lower(std::string(text.substr(i, end - i)));
}

// A '-' separating two range bounds: not leading, not an exponent sign.
std::size_t separator_hyphen(std::string_view token, std::size_t from = 1) {
  for (std::size_t i = std::max<std::size_t>(from, 1); i < token.size(); ++i) {
    if (token[i] != '-') continue;
    const char prev = token[i - 1];
    if (prev == 'e' || prev == 'E' || prev == ' ') {
      // `1e-3` is an exponent; `a - b` with spaces still separates.
      if (prev == ' ') return i;
      continue;
    }
    return i;
  }
  return std::string_view::npos;
}

struct Bracket {
  std::optional<std::string> name;
  ParamSlot slot;
};

Bracket parse_bracket(std::string_view raw) {
  Bracket out;
  std::string body = trim(raw);
  if (body.empty()) fail("empty bracket []");
  if (auto colon = body.find(':'); colon != std::string::npos) {
    std::string name = trim(std::string_view(body).substr(0, colon));
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) { return word_char(c); }))
      fail("invalid slot name in [" + body + "]");
    out.name = name;
    body = trim(std::string_view(body).substr(colon + 1));
    if (body.empty()) fail("empty bracket [" + std::string(raw) + "]");
  }

  const bool has_comma = body.find(',') != std::string::npos;
  const auto hyphen = separator_hyphen(body);
  if (has_comma) {
    // Enumerated: separator hyphens inside any element mean mixed separators.
    std::set<std::string> seen;
    for (const auto& part : split(body, ',')) {
      std::string token = trim(part);
      if (token.empty()) fail("empty value in [" + body + "]");
      if (separator_hyphen(token) != std::string::npos) fail("mixed separators in [" + body + "]");
      if (!seen.insert(token).second) fail("duplicate value '" + token + "' in [" + body + "]");
      double v = 0;
      if (parse_number(token, v)) {
        out.slot.values.emplace_back(v);
      } else {
        if (!std::all_of(token.begin(), token.end(), [](char c) { return word_char(c); }))
          fail("invalid value '" + token + "' in [" + body + "]");
        out.slot.values.emplace_back(token);
      }
    }
    out.slot.kind = SlotKind::Enumerated;
    return out;
  }
  if (hyphen != std::string::npos) {
    const std::string lo_text = trim(std::string_view(body).substr(0, hyphen));
    const std::string hi_text = trim(std::string_view(body).substr(hyphen + 1));
    double lo = 0, hi = 0;
    if (separator_hyphen(hi_text, 0) != std::string::npos || lo_text.empty() || lo_text[0] == '-' ||
        !parse_number(lo_text, lo) || !parse_number(hi_text, hi))
      fail("malformed range [" + body + "]: expected [lo-hi] with non-negative numbers");
    if (!(lo < hi)) fail("malformed range [" + body + "]: lower bound must be below upper bound");
    out.slot.kind = SlotKind::Range;
    out.slot.lo = lo;
    out.slot.hi = hi;
    return out;
  }
  double v = 0;
  if (parse_number(body, v)) {
    out.slot.values.emplace_back(v);
  } else {
    if (!std::all_of(body.begin(), body.end(), [](char c) { return word_char(c); }))
      fail("invalid value '" + body + "'");
    out.slot.values.emplace_back(body);
  }
  out.slot.kind = SlotKind::Enumerated;
  return out;
}

void apply_directive(BaseSimSpec& spec, std::string_view line) {
  std::string body = trim(line.substr(line.find('@') + 1));
  const auto colon = body.find(':');
  if (colon == std::string::npos) fail("directive without ':' : @" + body);
  const std::string key = trim(std::string_view(body).substr(0, colon));
  const std::string value = trim(std::string_view(body).substr(colon + 1));
  if (key.empty()) fail("directive without a name: @" + body);
  if (key == "id") {
    spec.id = value;
  } else if (key == "mission") {
    spec.mission_objective = value;
  } else if (key == "constraint") {
    std::vector<std::string> parts;
    for (auto& p : split(value, ' '))
      if (!p.empty()) parts.push_back(p);
    double v = 0;
    if (parts.size() != 4 || !parse_number(parts[3], v))
      fail("@constraint expects: <kind> <subject> <reference> <value>");
    spec.constraints.push_back({constraint_kind_from_string(parts[0]), parts[1], parts[2], v});
  } else {
    if (spec.fixed.count(key)) fail("fixed parameter '" + key + "' given twice");
    double v = 0;
    if (parse_number(value, v)) {
      spec.fixed[key] = v;
    } else {
      spec.fixed[key] = value;
    }
  }
}

}  // namespace

std::vector<Scalar> ParamSlot::levels(int range_steps) const {
  if (kind == SlotKind::Enumerated) return values;
  if (range_steps < 2) fail("range slot '" + name + "' needs at least 2 steps");
  std::vector<Scalar> out;
  for (int j = 0; j < range_steps; ++j) {
    const double t = static_cast<double>(j) / (range_steps - 1);
    out.emplace_back(j == range_steps - 1 ? hi : lo + (hi - lo) * t);
  }
  return out;
}

const ParamSlot* BaseSimSpec::find_slot(std::string_view name) const {
  for (const auto& s : slots)
    if (s.name == name) return &s;
  return nullptr;
}

BaseSimSpec parse_scenario(std::string_view text) {
  BaseSimSpec spec;

  // Directive lines are removed together with their newline.
  std::string prose;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    std::string_view line = text.substr(pos, last ? std::string_view::npos : nl - pos + 1);
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] == '@') {
      apply_directive(spec, line.substr(0, line.find_last_not_of("\r\n") + 1));
    } else {
      prose.append(line);
    }
    if (last) break;
    pos = nl + 1;
  }

  std::set<std::string> used;
  std::size_t i = 0;
  while (i < prose.size()) {
    const char c = prose[i];
    if (c == '{' || c == '}') fail("reserved character '" + std::string(1, c) + "' in scenario prose");
    if (c == ']') fail("unbalanced brackets: unmatched ']'");
    if (c != '[') {
      spec.narrative.push_back(c);
      ++i;
      continue;
    }
    const auto close = prose.find_first_of("[]", i + 1);
    if (close == std::string::npos || prose[close] == '[') fail("unbalanced brackets: unclosed '['");
    Bracket b = parse_bracket(std::string_view(prose).substr(i + 1, close - i - 1));

    std::string name = b.name.value_or(words_after(prose, close + 1));
    if (name.empty()) name = word_before(prose, i);
    if (name.empty()) name = "slot";
    if (used.count(name)) {
      int k = 2;
      while (used.count(name + "_" + std::to_string(k))) ++k;
      name += "_" + std::to_string(k);
    }
    used.insert(name);
    b.slot.name = name;
    spec.narrative += "{" + name + "}";
    spec.slots.push_back(std::move(b.slot));
    i = close + 1;
  }
  for (const auto& [k, v] : spec.fixed)
    if (used.count(k)) fail("parameter '" + k + "' is both fixed and a slot");
  return spec;
}

void apply_roles(BaseSimSpec& spec, std::string_view sidecar_json) {
  json doc;
  try {
    doc = json::parse(sidecar_json);
  } catch (const json::exception& e) {
    fail(std::string("malformed role sidecar: ") + e.what());
  }
  if (!doc.is_object()) fail("role sidecar must be an object of parameter -> role");
  for (const auto& [param, role] : doc.items()) {
    if (!role.is_string()) fail("role for '" + param + "' must be a string");
    if (!spec.find_slot(param) && !spec.fixed.count(param))
      fail("role sidecar names unknown parameter '" + param + "'");
    spec.roles[param] = role.get<std::string>();
  }
}

std::uint64_t slot_cardinality(const BaseSimSpec& spec, int range_steps) {
  std::uint64_t total = 1;
  for (const auto& s : spec.slots) {
    const std::uint64_t n = s.kind == SlotKind::Enumerated ? s.values.size() : static_cast<std::uint64_t>(range_steps);
    if (n != 0 && total > ~std::uint64_t{0} / n) fail("slot cardinality overflows 64 bits");
    total *= n;
  }
  return total;
}

std::string render(const BaseSimSpec& spec, const ParamMap& assignment) {
  std::string out;
  std::size_t i = 0;
  const auto& text = spec.narrative;
  while (i < text.size()) {
    if (text[i] != '{') {
      out.push_back(text[i++]);
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string::npos) fail("narrative has an unterminated slot marker");
    const std::string name = text.substr(i + 1, close - i - 1);
    auto it = assignment.find(name);
    if (it == assignment.end()) fail("no value bound for slot '" + name + "'");
    out += to_text(it->second);
    i = close + 1;
  }
  return out;
}

json to_json(const BaseSimSpec& spec) {
  json slots = json::array();
  for (const auto& s : spec.slots) {
    json j{{"name", s.name}, {"kind", s.kind == SlotKind::Enumerated ? "enumerated" : "range"}};
    if (s.kind == SlotKind::Enumerated) {
      j["values"] = json::array();
      for (const auto& v : s.values) j["values"].push_back(scalar_to_json(v));
    } else {
      j["lo"] = s.lo;
      j["hi"] = s.hi;
    }
    if (s.unit) j["unit"] = *s.unit;
    slots.push_back(std::move(j));
  }
  json constraints = json::array();
  for (const auto& c : spec.constraints) constraints.push_back(rebar::to_json(c));
  return {{"id", spec.id},
          {"mission_objective", spec.mission_objective},
          {"narrative", spec.narrative},
          {"slots", slots},
          {"fixed", params_to_json(spec.fixed)},
          {"constraints", constraints},
          {"roles", spec.roles}};
}

BaseSimSpec base_from_json(const json& j) {
  BaseSimSpec spec;
  try {
    spec.id = j.value("id", std::string("base"));
    spec.mission_objective = j.value("mission_objective", std::string{});
    spec.narrative = j.value("narrative", std::string{});
    for (const auto& s : j.value("slots", json::array())) {
      ParamSlot slot;
      slot.name = s.at("name").get<std::string>();
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "enumerated") {
        slot.kind = SlotKind::Enumerated;
        for (const auto& v : s.at("values")) slot.values.push_back(scalar_from_json(v));
        if (slot.values.empty()) fail("enumerated slot '" + slot.name + "' has no values");
      } else if (kind == "range") {
        slot.kind = SlotKind::Range;
        slot.lo = s.at("lo").get<double>();
        slot.hi = s.at("hi").get<double>();
        if (!(slot.lo < slot.hi)) fail("range slot '" + slot.name + "' needs lo < hi");
      } else {
        fail("unknown slot kind '" + kind + "'");
      }
      if (s.contains("unit")) slot.unit = s.at("unit").get<std::string>();
      spec.slots.push_back(std::move(slot));
    }
    spec.fixed = params_from_json(j.value("fixed", json::object()));
    for (const auto& c : j.value("constraints", json::array())) spec.constraints.push_back(constraint_from_json(c));
    spec.roles = j.value("roles", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    fail(std::string("malformed base SimSpec: ") + e.what());
  }
  return spec;
}

}  // namespace rebar::scenario
