#pragma once

#include <sstream>
#include <string>

namespace teamscope {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// current threshold; initialized from TEAMSCOPE_LOG (error|warn|info|debug),
// default warn
LogLevel log_threshold();
void set_log_threshold(LogLevel level);

void log_line(LogLevel level, const std::string& msg);

namespace detail {
template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream ss;
  (ss << ... << args);
  return ss.str();
}
}  // namespace detail

template <typename... Args>
void log_error(Args&&... args) {
  log_line(LogLevel::error, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_warn(Args&&... args) {
  log_line(LogLevel::warn, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_info(Args&&... args) {
  log_line(LogLevel::info, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_debug(Args&&... args) {
  log_line(LogLevel::debug, detail::cat(std::forward<Args>(args)...));
}

}  // namespace teamscope
