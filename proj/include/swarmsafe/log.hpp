#pragma once

#include <string>

namespace swarmsafe {

/// Sets the spdlog level from SWARMSAFE_LOG (error, info, debug; default
/// error). Returns the level name in effect.
std::string configure_logging();

/// configure_logging() unless it already ran; the library calls this before
/// its first message.
void ensure_logging();

}  // namespace swarmsafe
