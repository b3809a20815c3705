#include "cdc/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace cdc {

void init_logging_from_env() {
  auto logger = spdlog::get("cdc_incent");
  if (!logger) {
    logger = spdlog::stderr_color_mt("cdc_incent");
    logger->set_pattern("[%l] %v");
  }
  spdlog::set_default_logger(logger);

  const char* env = std::getenv("CDC_INCENT_LOG");
  std::string_view level = env ? env : "info";
  if (level == "quiet") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace cdc
