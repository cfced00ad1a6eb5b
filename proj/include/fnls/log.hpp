#pragma once

#include <spdlog/spdlog.h>

#include <string_view>

namespace fnls::log {

/// Level from FNLS_LOG (error, info, debug); default info. Throws ConfigError
/// on any other value.
spdlog::level::level_enum level_from_env();

/// Shared stderr logger, configured from FNLS_LOG on first use.
spdlog::logger& logger();

template <class... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().debug(fmt, std::forward<Args>(args)...);
}
template <class... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().info(fmt, std::forward<Args>(args)...);
}
template <class... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().warn(fmt, std::forward<Args>(args)...);
}
template <class... Args>
void error(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().error(fmt, std::forward<Args>(args)...);
}

}  // namespace fnls::log
