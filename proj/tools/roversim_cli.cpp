#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "roversim/errors.hpp"
#include "roversim/event_log.hpp"
#include "roversim/metrics.hpp"
#include "roversim/scenario.hpp"
#include "roversim/simulation.hpp"
#include "roversim/sweep.hpp"
#include "roversim/terrain.hpp"

namespace fs = std::filesystem;
using namespace roversim;
using namespace roversim::harness;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInvalid = 2, kUnsafe = 3 };

fs::path log_dir() {
  const char* env = std::getenv("ROVERSIM_LOG_DIR");
  return env && *env ? fs::path(env) : fs::current_path();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void emit_metrics(const MetricsReport& m, const std::string& csv_path, const std::string& json_path,
                  double ops_hours) {
  std::ostringstream csv;
  write_metrics_csv(m, csv);
  if (ops_hours > 0.0)
    csv << "daily_traverse_projection,m/sol," << nlohmann::json(daily_traverse_projection(m, ops_hours)).dump()
        << '\n';
  std::cout << csv.str();
  if (!csv_path.empty()) write_file(csv_path, csv.str());
  if (!json_path.empty()) write_file(json_path, m.to_json().dump(2) + "\n");
}

std::vector<nlohmann::json> parse_values(const std::string& list) {
  std::vector<nlohmann::json> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(nlohmann::json::parse(item));
    } catch (const nlohmann::json::parse_error&) {
      values.push_back(item);
    }
  }
  if (values.empty()) throw ValidationError("--values", "empty value list");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planetary rover navigation and coordination simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string log_path;
  std::string csv_path;
  std::string json_path;
  std::string terrain_dir;
  std::string map_dir;
  std::size_t map_every = 0;
  double ops_hours = 0.0;
  std::uint64_t seed_override = 0;
  bool has_seed = false;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and print its metrics as CSV");
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--log", log_path, "Event log path (default: $ROVERSIM_LOG_DIR/<name>.jsonl)");
  run_cmd->add_option("--csv", csv_path, "Also write the metrics CSV here");
  run_cmd->add_option("--json", json_path, "Write the metrics report as JSON");
  run_cmd->add_option("--export-terrain", terrain_dir, "Write heights.csv and labels.csv to this directory");
  run_cmd->add_option("--map-every", map_every, "Dump the traversability map every N ticks");
  run_cmd->add_option("--map-dir", map_dir, "Directory for traversability map dumps");
  run_cmd->add_option("--ops-hours", ops_hours, "Append a daily traverse projection for these driving hours per sol");
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "Override sim.seed");

  std::string axis;
  std::string values_arg;
  std::string policy_arg = "same";
  unsigned jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--axis", axis, "Dotted parameter path, e.g. gnc.v_cmd_faster")->required();
  sweep_cmd->add_option("--values", values_arg, "Comma-separated values")->required();
  sweep_cmd->add_option("--seed-policy", policy_arg, "same or per_value")
      ->check(CLI::IsMember({"same", "per_value"}));
  sweep_cmd->add_option("--csv", csv_path, "Also write the sweep table here");
  sweep_cmd->add_option("-j,--jobs", jobs, "Concurrent runs (default: hardware threads)");

  std::string report_log;
  auto* report_cmd = app.add_subcommand("report", "Recompute metrics from an event log");
  report_cmd->add_option("log", report_log, "JSON-lines event log")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--csv", csv_path, "Also write the metrics CSV here");
  report_cmd->add_option("--json", json_path, "Write the metrics report as JSON");
  report_cmd->add_option("--ops-hours", ops_hours, "Append a daily traverse projection");

  CLI11_PARSE(app, argc, argv);
  has_seed = seed_opt->count() > 0;

  try {
    if (*run_cmd) {
      Scenario sc = load_scenario_file(scenario_path);
      if (has_seed) sc.sim.seed = seed_override;
      if (!terrain_dir.empty()) {
        const auto world = terrain::generate_terrain(sc.terrain);
        fs::create_directories(terrain_dir);
        std::ofstream h(fs::path(terrain_dir) / "heights.csv");
        terrain::write_heights_csv(world, h);
        std::ofstream l(fs::path(terrain_dir) / "labels.csv");
        terrain::write_labels_csv(world, l);
      }
      RunOptions opts;
      opts.map_dump_every = map_every;
      opts.map_dump_dir = map_dir.empty() ? (log_dir() / (sc.name + "_maps")).string() : map_dir;
      const RunResult res = run(sc, opts);
      const fs::path out = log_path.empty() ? log_dir() / (sc.name + ".jsonl") : fs::path(log_path);
      write_file(out, to_jsonl(res.log));
      std::cerr << "event log: " << out.string() << '\n';
      emit_metrics(res.metrics, csv_path, json_path, ops_hours);
      if (res.metrics.collisions > 0) {
        std::cerr << "safety invariant violated: " << res.metrics.collisions << " collision(s)\n";
        return kUnsafe;
      }
    } else if (*sweep_cmd) {
      const Scenario sc = load_scenario_file(scenario_path);
      const auto policy = policy_arg == "same" ? SeedPolicy::Same : SeedPolicy::PerValue;
      const SweepResult res = sweep(sc, axis, parse_values(values_arg), policy, jobs);
      std::ostringstream csv;
      write_sweep_csv(res, csv);
      std::cout << csv.str();
      if (!csv_path.empty()) write_file(csv_path, csv.str());
      for (const auto& row : res.rows)
        if (row.metrics.collisions > 0) {
          std::cerr << "safety invariant violated at " << axis << "=" << row.value.dump() << '\n';
          return kUnsafe;
        }
    } else if (*report_cmd) {
      const EventLog log = read_jsonl_file(report_log);
      const MetricsReport m = compute_metrics(log, scenario_from_log(log));
      emit_metrics(m, csv_path, json_path, ops_hours);
      if (m.collisions > 0) return kUnsafe;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kInvalid;
  } catch (const RunError& e) {
    std::cerr << "run aborted: " << e.what() << "\nlast log records:\n";
    for (const auto& line : e.tail()) std::cerr << "  " << line << '\n';
    return kFailure;
  } catch (const LogIntegrityError& e) {
    std::cerr << "bad event log: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
