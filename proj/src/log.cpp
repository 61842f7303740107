#include "evolve/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace evolve::log {

Level level() {
    static const Level parsed = [] {
        const char* env = std::getenv("EVOLVE_LOG");
        if (env == nullptr) return Level::Silent;
        std::string v(env);
        if (v == "debug") return Level::Debug;
        if (v == "info") return Level::Info;
        return Level::Silent;
    }();
    return parsed;
}

namespace {

std::mutex mu;

void emit(const char* tag, const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << tag << msg << '\n';
}

}  // namespace

void info(const std::string& msg) {
    if (level() >= Level::Info) emit("[evolve] ", msg);
}

void debug(const std::string& msg) {
    if (level() >= Level::Debug) emit("[evolve:debug] ", msg);
}

}  // namespace evolve::log
