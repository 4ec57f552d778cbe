#include "roversim/sweep.hpp"

#include <algorithm>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include "roversim/errors.hpp"
#include "roversim/rng.hpp"
#include "roversim/simulation.hpp"

namespace roversim::harness {

using nlohmann::json;

std::string_view to_string(SeedPolicy policy) {
  return policy == SeedPolicy::Same ? "same" : "per_value";
}

Scenario with_parameter(const Scenario& base, const std::string& axis, const json& value) {
  if (axis.empty()) throw ValidationError("axis", "empty parameter path");
  json doc = base.to_json();
  json* node = &doc;
  std::stringstream parts(axis);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(parts, key, '.')) keys.push_back(key);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& k = keys[i];
    if (node->is_array()) {
      const bool numeric = !k.empty() && std::all_of(k.begin(), k.end(), ::isdigit);
      if (!numeric || std::stoul(k) >= node->size())
        throw ValidationError(axis, "no such parameter");
      node = &(*node)[std::stoul(k)];
    } else if (node->is_object() && node->contains(k)) {
      node = &(*node)[k];
    } else {
      throw ValidationError(axis, "no such parameter");
    }
  }
  if (node->is_object() || node->is_array()) throw ValidationError(axis, "not a scalar parameter");
  *node = value;
  return load_scenario(doc);
}

std::uint64_t sweep_seed(std::uint64_t base, std::size_t index, SeedPolicy policy) {
  if (policy == SeedPolicy::Same) return base;
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

SweepResult sweep(const Scenario& base, const std::string& axis, const std::vector<json>& values,
                  SeedPolicy policy, unsigned max_parallel) {
  SweepResult result;
  result.axis = axis;
  result.policy = policy;

  std::vector<Scenario> runs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Scenario sc = with_parameter(base, axis, values[i]);
    sc.sim.seed = sweep_seed(base.sim.seed, i, policy);
    runs.push_back(std::move(sc));
  }

  if (max_parallel == 0) max_parallel = std::max(1u, std::thread::hardware_concurrency());
  std::vector<MetricsReport> reports(runs.size());
  for (std::size_t begin = 0; begin < runs.size(); begin += max_parallel) {
    const std::size_t end = std::min(runs.size(), begin + max_parallel);
    std::vector<std::future<MetricsReport>> batch;
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(std::launch::async, [&runs, i] { return run(runs[i]).metrics; }));
    for (std::size_t i = begin; i < end; ++i) reports[i] = batch[i - begin].get();
  }
  for (std::size_t i = 0; i < runs.size(); ++i)
    result.rows.push_back({values[i], runs[i].sim.seed, std::move(reports[i])});
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "axis,value,seed_policy,seed";
  if (!result.rows.empty())
    for (const auto& row : metric_rows(result.rows.front().metrics))
      out << ',' << row.metric << " (" << row.unit << ')';
  out << '\n';
  for (const auto& r : result.rows) {
    out << result.axis << ',' << r.value.dump() << ',' << to_string(result.policy) << ',' << r.seed;
    for (const auto& row : metric_rows(r.metrics)) out << ',' << json(row.value).dump();
    out << '\n';
  }
}

}  // namespace roversim::harness
