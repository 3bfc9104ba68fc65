#include "tripletrec/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace tripletrec::log {

namespace {
Level g_level = Level::warn;

const char* level_tag(Level lvl) {
    switch (lvl) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}
}  // namespace

Level level() { return g_level; }

void set_level(Level lvl) { g_level = lvl; }

void init_from_env(Level fallback) {
    g_level = fallback;
    const char* env = std::getenv("TRIPLETREC_LOG");
    if (env == nullptr) return;
    if (std::strcmp(env, "error") == 0) g_level = Level::error;
    else if (std::strcmp(env, "warn") == 0) g_level = Level::warn;
    else if (std::strcmp(env, "info") == 0) g_level = Level::info;
    else if (std::strcmp(env, "debug") == 0) g_level = Level::debug;
}

void write(Level lvl, const char* fmt, ...) {
    if (lvl > g_level) return;
    std::fprintf(stderr, "[%s] ", level_tag(lvl));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace tripletrec::log
