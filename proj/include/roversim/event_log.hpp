#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace roversim::harness {

// JSON-lines event log: one record per line, each with a "type" field.
using EventLog = std::vector<nlohmann::json>;

void write_jsonl(const EventLog& log, std::ostream& out);
std::string to_jsonl(const EventLog& log);

// Throws LogIntegrityError on a malformed line.
EventLog read_jsonl(std::istream& in);
EventLog read_jsonl_file(const std::string& path);

}  // namespace roversim::harness
