#include "snodri/logging.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace snodri::log {

namespace {

Level g_threshold = [] {
    const char* env = std::getenv("SNODRI_LOG");
    if (env == nullptr) return Level::warn;
    const std::string v(env);
    if (v == "error") return Level::error;
    if (v == "warn") return Level::warn;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}();

std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() { return g_threshold; }

void set_threshold(Level level) { g_threshold = level; }

void write(Level level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(g_threshold)) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[snodri:" << tag(level) << "] " << message << "\n";
}

}  // namespace snodri::log
