#include "teamscope/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace teamscope {

namespace {

LogLevel parse_level(const char* s) {
  std::string v = s ? s : "";
  if (v == "error") return LogLevel::error;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

LogLevel& threshold_ref() {
  static LogLevel level = parse_level(std::getenv("TEAMSCOPE_LOG"));
  return level;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    default: return "debug";
  }
}

std::mutex log_mutex;

}  // namespace

LogLevel log_threshold() { return threshold_ref(); }

void set_log_threshold(LogLevel level) { threshold_ref() = level; }

void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(threshold_ref())) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[" << level_tag(level) << "] " << msg << "\n";
}

}  // namespace teamscope
