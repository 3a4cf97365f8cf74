#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace juris {

// Error in user-supplied data. Carries file/line so CLI messages point at
// the offending input.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
  DataError(const std::string& path, size_t line, const std::string& msg)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
};

std::string read_file(const std::string& path);

bool file_exists(const std::string& path);

// Write via a temp file + rename so failed commands never leave partial
// artifacts behind.
void write_file_atomic(const std::string& path, const std::string& content);

// Calls fn(line_number, line) for each line (1-based, no trailing '\n').
// Skips lines that are empty after trimming.
void for_each_line(const std::string& path,
                   const std::function<void(size_t, const std::string&)>& fn);

// Parse one JSONL line; wraps parse failures in a positioned DataError.
nlohmann::json parse_json_line(const std::string& path, size_t line_no,
                               const std::string& line);

std::vector<std::string> split_tabs(const std::string& line);

// Shortest round-trip formatting for doubles (what nlohmann::json emits),
// used anywhere a text artifact must reload bit-exactly.
std::string format_double(double v);

// Fixed-precision helper for report tables.
std::string format_fixed(double v, int digits);

}  // namespace juris
