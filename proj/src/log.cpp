#include "swarmsafe/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <mutex>

namespace swarmsafe {

std::string configure_logging() {
  // Logs go to stderr; stdout carries the command's own output.
  auto logger = spdlog::get("swarmsafe");
  if (!logger) logger = spdlog::stderr_color_mt("swarmsafe");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  const char* env = std::getenv("SWARMSAFE_LOG");
  const std::string want = env ? env : "error";
  if (want == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (want == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
    if (want != "error") spdlog::error("SWARMSAFE_LOG={} not recognised, using error", want);
    return "error";
  }
  return want;
}

void ensure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (!spdlog::get("swarmsafe")) configure_logging();
  });
}

}  // namespace swarmsafe
