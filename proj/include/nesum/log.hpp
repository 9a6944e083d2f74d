#pragma once

#include <cstdlib>
#include <string_view>

namespace nesum {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Process-wide verbosity, controlled by the NESUM_LOG environment variable
/// (quiet | info | debug). Defaults to info.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("NESUM_LOG");
    if (!env) return LogLevel::info;
    std::string_view v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

}  // namespace nesum
