#include "roversim/rover_state.hpp"

namespace roversim {

std::string_view to_string(NavMode mode) {
  switch (mode) {
    case NavMode::FASTER: return "FASTER";
    case NavMode::RAPID: return "RAPID";
    case NavMode::TELEOP: return "TELEOP";
    case NavMode::SAFE_STOP: return "SAFE_STOP";
  }
  return "?";
}

std::optional<NavMode> nav_mode_from_string(std::string_view name) {
  for (NavMode m : kAllModes)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

}  // namespace roversim
