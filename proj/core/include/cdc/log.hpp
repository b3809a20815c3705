#pragma once

namespace cdc {

/// Sets the spdlog level from CDC_INCENT_LOG (quiet, info or debug; default
/// info). Messages go to stderr.
void init_logging_from_env();

}  // namespace cdc
