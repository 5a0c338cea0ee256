#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace act {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Verbosity from the ACT_LOG environment variable (error|warn|info|debug or 0-3); default warn.
LogLevel log_level();

void log_line(LogLevel level, const std::string& message);

template <typename... Args>
void log(LogLevel level, const Args&... args) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::ostringstream out;
    (out << ... << args);
    log_line(level, out.str());
}

}  // namespace act
