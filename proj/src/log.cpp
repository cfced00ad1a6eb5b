#include "fnls/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>
#include <string>

#include "fnls/errors.hpp"

namespace fnls::log {

spdlog::level::level_enum level_from_env() {
  const char* v = std::getenv("FNLS_LOG");
  if (!v || !*v) return spdlog::level::info;
  const std::string s(v);
  if (s == "error") return spdlog::level::err;
  if (s == "info") return spdlog::level::info;
  if (s == "debug") return spdlog::level::debug;
  throw ConfigError("FNLS_LOG must be one of error, info, debug (got '" + s + "')");
}

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> inst = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto lg = std::make_shared<spdlog::logger>("fnls", sink);
    lg->set_pattern("[%H:%M:%S.%e] [%l] %v");
    spdlog::level::level_enum lvl = spdlog::level::info;
    try {
      lvl = level_from_env();
    } catch (const ConfigError&) {
    }
    lg->set_level(lvl);
    return lg;
  }();
  return *inst;
}

}  // namespace fnls::log
