#pragma once

#include <string>

namespace stefan {

enum class LogLevel : int { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level comes from the STEFAN_LOG environment variable (debug|info|warn|error|off),
// default warn. Messages go to stderr; stdout stays clean for data.
LogLevel log_level();
void log(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& m) { log(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log(LogLevel::Error, m); }

}  // namespace stefan
