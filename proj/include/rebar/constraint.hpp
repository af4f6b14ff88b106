#pragma once

#include <string>
#include <string_view>

#include "rebar/common.hpp"

namespace rebar {

enum class ConstraintKind { WithinRegion, MinDistance, MaxDistance, HeadingFrom };

std::string_view to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(std::string_view text);

/// A relational placement rule. `reference` is a region id for within_region
/// and an actor id otherwise; `value` is meters, or degrees for heading_from
/// (compass bearing from reference to subject, matched within +-22.5 degrees).
struct PlacementConstraint {
  ConstraintKind kind = ConstraintKind::WithinRegion;
  std::string subject;
  std::string reference;
  double value = 0.0;

  std::string describe() const;
  bool operator==(const PlacementConstraint&) const = default;
};

json to_json(const PlacementConstraint& c);
PlacementConstraint constraint_from_json(const json& j);

}  // namespace rebar
