#pragma once

#include <string>

namespace unifcap {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Diagnostics level, read once from UNIFCAP_LOG (error|warn|info|debug).
LogLevel log_level();

void log_message(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_message(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::Debug, msg); }

}  // namespace unifcap
