#include "guardscan/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstdio>
#include <mutex>
#include <string>

namespace guardscan::log {
namespace {

Level level_from_env()
{
    const char* v = std::getenv("GUARDSCAN_LOG");
    if (v == nullptr) return Level::warn;
    const std::string s(v);
    if (s == "error") return Level::error;
    if (s == "info") return Level::info;
    if (s == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<int>& current()
{
    static std::atomic<int> lvl{static_cast<int>(level_from_env())};
    return lvl;
}

std::atomic<std::size_t> g_warnings{0};
std::mutex g_write_mutex;

const char* tag(Level lvl)
{
    switch (lvl) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
    }
    return "?";
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

std::size_t warning_count() { return g_warnings.load(); }

void write(Level lvl, std::string_view msg)
{
    if (lvl == Level::warn) ++g_warnings;
    if (lvl > level()) return;
    std::lock_guard lock(g_write_mutex);
    fmt::print(stderr, "[guardscan {}] {}\n", tag(lvl), msg);
}

}  // namespace guardscan::log
