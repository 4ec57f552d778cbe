#include "roversim/event_log.hpp"

#include <fstream>
#include <sstream>

#include "roversim/errors.hpp"

namespace roversim::harness {

void write_jsonl(const EventLog& log, std::ostream& out) {
  for (const auto& rec : log) out << rec.dump() << '\n';
}

std::string to_jsonl(const EventLog& log) {
  std::ostringstream out;
  write_jsonl(log, out);
  return out.str();
}

EventLog read_jsonl(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      log.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error&) {
      throw LogIntegrityError("event log line " + std::to_string(lineno) + " is not valid JSON");
    }
    if (!log.back().is_object() || !log.back().contains("type"))
      throw LogIntegrityError("event log line " + std::to_string(lineno) + " has no record type");
  }
  return log;
}

EventLog read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LogIntegrityError("cannot open event log " + path);
  return read_jsonl(in);
}

}  // namespace roversim::harness
