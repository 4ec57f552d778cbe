#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "roversim/event_log.hpp"
#include "roversim/metrics.hpp"
#include "roversim/scenario.hpp"

namespace roversim::harness {

struct RunOptions {
  std::size_t map_dump_every = 0;  // ticks between traversability CSV dumps; 0 disables
  std::string map_dump_dir;
};

struct RunResult {
  EventLog log;
  MetricsReport metrics;
};

// A module error raised mid-run, with the last records of the log attached.
class RunError : public std::runtime_error {
public:
  RunError(const std::string& what, std::vector<std::string> tail)
      : std::runtime_error(what), tail_(std::move(tail)) {}
  const std::vector<std::string>& tail() const noexcept { return tail_; }

private:
  std::vector<std::string> tail_;
};

// Fixed-step loop: sense -> threshold -> fuse -> decay -> replan -> mode ->
// speed -> point turn or tracking -> kinematics, with coordination events
// processed on the same clock.
EventLog simulate(const Scenario& scenario, const RunOptions& opts = {});

RunResult run(const Scenario& scenario, const RunOptions& opts = {});

}  // namespace roversim::harness
