#include "act/log.hpp"

#include <cstdlib>
#include <mutex>

namespace act {

namespace {

LogLevel parse_level(const char* text) {
    if (text == nullptr) return LogLevel::Warn;
    const std::string v(text);
    if (v == "error" || v == "0") return LogLevel::Error;
    if (v == "info" || v == "2") return LogLevel::Info;
    if (v == "debug" || v == "3") return LogLevel::Debug;
    return LogLevel::Warn;
}

const char* tag(LogLevel level) {
    switch (level) {
        case LogLevel::Error: return "error";
        case LogLevel::Warn: return "warn";
        case LogLevel::Info: return "info";
        case LogLevel::Debug: return "debug";
    }
    return "?";
}

}  // namespace

LogLevel log_level() {
    static const LogLevel level = parse_level(std::getenv("ACT_LOG"));
    return level;
}

void log_line(LogLevel level, const std::string& message) {
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::cerr << "[" << tag(level) << "] " << message << '\n';
}

}  // namespace act
