#include "stefan/log.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace stefan {

LogLevel log_level() {
  static LogLevel cached = [] {
    const char* env = std::getenv("STEFAN_LOG");
    if (!env) return LogLevel::Warn;
    if (!std::strcmp(env, "debug")) return LogLevel::Debug;
    if (!std::strcmp(env, "info")) return LogLevel::Info;
    if (!std::strcmp(env, "warn")) return LogLevel::Warn;
    if (!std::strcmp(env, "error")) return LogLevel::Error;
    if (!std::strcmp(env, "off")) return LogLevel::Off;
    return LogLevel::Warn;
  }();
  return cached;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < static_cast<int>(log_level())) return;
  static std::mutex mu;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[stefan:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

}  // namespace stefan
