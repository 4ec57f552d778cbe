#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "roversim/metrics.hpp"
#include "roversim/scenario.hpp"

namespace roversim::harness {

enum class SeedPolicy { Same, PerValue };

std::string_view to_string(SeedPolicy policy);

struct SweepRow {
  nlohmann::json value;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

struct SweepResult {
  std::string axis;
  SeedPolicy policy = SeedPolicy::Same;
  std::vector<SweepRow> rows;  // input order
};

// Copy of `base` with the dotted parameter path (e.g. "gnc.v_cmd_faster",
// "coordination.bus.latency") set to `value`, revalidated. Throws
// ValidationError when the path does not name an existing parameter.
Scenario with_parameter(const Scenario& base, const std::string& axis, const nlohmann::json& value);

// Seed used for the i-th value.
std::uint64_t sweep_seed(std::uint64_t base, std::size_t index, SeedPolicy policy);

// One run per value; runs execute concurrently and are merged by input order.
SweepResult sweep(const Scenario& base, const std::string& axis,
                  const std::vector<nlohmann::json>& values, SeedPolicy policy = SeedPolicy::Same,
                  unsigned max_parallel = 0);

// One row per value: axis, value, seed_policy, seed, then every metric column.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

}  // namespace roversim::harness
