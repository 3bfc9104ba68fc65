#pragma once

#include <cstdarg>

namespace tripletrec::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level level();
void set_level(Level lvl);

// Reads TRIPLETREC_LOG (error|warn|info|debug); falls back to `fallback`
// when unset or unrecognized.
void init_from_env(Level fallback = Level::warn);

void write(Level lvl, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

#define TR_LOG_ERROR(...) ::tripletrec::log::write(::tripletrec::log::Level::error, __VA_ARGS__)
#define TR_LOG_WARN(...) ::tripletrec::log::write(::tripletrec::log::Level::warn, __VA_ARGS__)
#define TR_LOG_INFO(...) ::tripletrec::log::write(::tripletrec::log::Level::info, __VA_ARGS__)
#define TR_LOG_DEBUG(...) ::tripletrec::log::write(::tripletrec::log::Level::debug, __VA_ARGS__)

}  // namespace tripletrec::log
