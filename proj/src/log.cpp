#include "hill/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hill/error.hpp"

namespace hill {

void set_log_level(std::string_view level) {
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    throw Error("HILL_LOG must be error, info or debug, got '" + std::string(level) + "'");
  }
}

void init_logging() {
  auto logger = spdlog::get("hill");
  if (!logger) logger = spdlog::stderr_color_mt("hill");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("HILL_LOG");
  set_log_level(env && *env ? env : "error");
}

}  // namespace hill
