#pragma once

#include <fmt/format.h>

#include <string_view>

namespace guardscan::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current threshold. Initialised from GUARDSCAN_LOG (error|warn|info|debug), default warn.
Level level();
void set_level(Level lvl);

/// Number of warnings emitted since process start; tests use it to observe fail-open paths.
std::size_t warning_count();

void write(Level lvl, std::string_view msg);

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args)
{
    write(Level::warn, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args)
{
    if (level() >= Level::info) write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args)
{
    if (level() >= Level::debug) write(Level::debug, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void error(fmt::format_string<Args...> f, Args&&... args)
{
    write(Level::error, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace guardscan::log
