#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/constraint.hpp"

namespace rebar::scenario {

enum class SlotKind { Enumerated, Range };

struct ParamSlot {
  std::string name;
  SlotKind kind = SlotKind::Enumerated;
  std::vector<Scalar> values;  // enumerated
  double lo = 0.0, hi = 0.0;   // range, inclusive
  std::optional<std::string> unit;

  /// Discrete values of the slot; ranges are sampled at `range_steps` evenly
  /// spaced points including both endpoints.
  std::vector<Scalar> levels(int range_steps) const;
};

/// A scenario with unbound parameter slots.
struct BaseSimSpec {
  std::string id = "base";
  std::string mission_objective;
  std::string narrative;  // prose with `{slot}` markers
  std::vector<ParamSlot> slots;
  ParamMap fixed;
  std::vector<PlacementConstraint> constraints;
  std::map<std::string, std::string> roles;  // parameter name -> scene/sim role

  const ParamSlot* find_slot(std::string_view name) const;
};

/// Parses scenario text.
///
/// Bracket grammar: `[a,b,c]` is an enumerated set of numbers or bare words;
/// `[lo-hi]` (two non-negative numbers, one hyphen) is an inclusive range;
/// `[name: ...]` overrides the derived slot name. Otherwise a slot is named
/// by up to three words following the bracket (lowercased, joined with `_`),
/// falling back to the single word before it. Repeated names get `_2`, `_3`.
///
/// Lines beginning with `@` are directives and are not part of the narrative:
///   @id: <base id>          @mission: <objective>
///   @constraint: <kind> <subject> <reference> <value>
///   @<parameter>: <value>   (a fixed parameter)
BaseSimSpec parse_scenario(std::string_view text);

/// Attaches a parameter-name -> role mapping (the optional sidecar document,
/// a flat JSON object). Unknown parameter names are rejected.
void apply_roles(BaseSimSpec& spec, std::string_view sidecar_json);

/// Product over slots of |values| (enumerated) or range_steps (range).
std::uint64_t slot_cardinality(const BaseSimSpec& spec, int range_steps);

/// The narrative with every `{slot}` replaced by its bound value.
std::string render(const BaseSimSpec& spec, const ParamMap& assignment);

json to_json(const BaseSimSpec& spec);
BaseSimSpec base_from_json(const json& j);

}  // namespace rebar::scenario
