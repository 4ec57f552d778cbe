#pragma once

#include <optional>
#include <string_view>

#include "roversim/geometry.hpp"

namespace roversim {

enum class NavMode { FASTER, RAPID, TELEOP, SAFE_STOP };

inline constexpr NavMode kAllModes[] = {NavMode::FASTER, NavMode::RAPID, NavMode::TELEOP,
                                        NavMode::SAFE_STOP};

std::string_view to_string(NavMode mode);
std::optional<NavMode> nav_mode_from_string(std::string_view name);

struct RoverState {
  Vec2 position;
  double heading = 0.0;  // radians, (-pi, pi]
  double speed = 0.0;    // m/s, >= 0
  double omega = 0.0;    // rad/s
  NavMode mode = NavMode::RAPID;
  double time = 0.0;
};

}  // namespace roversim
