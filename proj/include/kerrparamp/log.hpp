#pragma once

#include <spdlog/spdlog.h>

namespace kerrparamp::log {

using spdlog::debug;
using spdlog::error;
using spdlog::info;
using spdlog::warn;

/// Route logging to stderr at the level named by KERRPARAMP_LOG
/// (trace, debug, info, warn, error, off). Default: warn.
void init_from_env();

}  // namespace kerrparamp::log
