#pragma once

// Line-oriented leveled logging to standard error and (optionally) a file.
// Format: "[LEVEL] message\n" — simple enough to assert on in tests.

#include <fstream>
#include <iostream>
#include <mutex>
#include <string>

#include "advsec/error.hpp"

namespace advsec {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

inline const char* log_level_name(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "DEBUG";
        case LogLevel::info: return "INFO";
        case LogLevel::warn: return "WARN";
        case LogLevel::error: return "ERROR";
    }
    return "?";
}

inline LogLevel log_level_from_name(const std::string& name) {
    if (name == "debug") return LogLevel::debug;
    if (name == "info") return LogLevel::info;
    if (name == "warn") return LogLevel::warn;
    if (name == "error") return LogLevel::error;
    throw InvalidArgumentError("unknown log level '" + name +
                               "' (expected debug|info|warn|error)");
}

/// Thread-safe sink writing "[LEVEL] msg" lines at or above a threshold.
class Logger {
public:
    explicit Logger(LogLevel threshold = LogLevel::info) : threshold_(threshold) {}

    /// Additionally mirror lines into `path` (truncates any existing file).
    void open_file(const std::string& path) {
        std::lock_guard<std::mutex> lock(mu_);
        file_.open(path, std::ios::trunc);
        if (!file_) throw InvalidArgumentError("cannot open log file '" + path + "'");
    }

    void set_threshold(LogLevel t) { threshold_ = t; }
    LogLevel threshold() const { return threshold_; }

    void log(LogLevel level, const std::string& msg) {
        if (level < threshold_) return;
        std::lock_guard<std::mutex> lock(mu_);
        const std::string line = std::string("[") + log_level_name(level) + "] " + msg + "\n";
        std::cerr << line;
        if (file_.is_open()) file_ << line << std::flush;
    }

    void debug(const std::string& msg) { log(LogLevel::debug, msg); }
    void info(const std::string& msg) { log(LogLevel::info, msg); }
    void warn(const std::string& msg) { log(LogLevel::warn, msg); }
    void error(const std::string& msg) { log(LogLevel::error, msg); }

private:
    LogLevel threshold_;
    std::mutex mu_;
    std::ofstream file_;
};

}  // namespace advsec
