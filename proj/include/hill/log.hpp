#pragma once

#include <string_view>

namespace hill {

/// Sets the spdlog level from HILL_LOG (error, info or debug; default
/// error). Unknown values are rejected.
void init_logging();
void set_log_level(std::string_view level);

}  // namespace hill
