#include "kerrparamp/log.hpp"

#include <cstdlib>
#include <spdlog/sinks/stdout_sinks.h>

namespace kerrparamp::log {

void init_from_env() {
  auto logger = spdlog::get("kerrparamp");
  if (!logger) logger = spdlog::stderr_logger_mt("kerrparamp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("KERRPARAMP_LOG"))
    spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace kerrparamp::log
