#pragma once

#include <string>

#include "kerrparamp/config.hpp"

namespace fixtures {

inline std::string bundled_config_path() {
  return std::string(KERRPARAMP_SOURCE_DIR) + "/configs/paper_device.json";
}

inline const kerrparamp::RunConfig& bundled_config() {
  static const kerrparamp::RunConfig cfg = kerrparamp::parse_config(bundled_config_path());
  return cfg;
}

inline const kerrparamp::ModeParams& device() {
  static const kerrparamp::ModeParams p = kerrparamp::config_params(bundled_config());
  return p;
}

}  // namespace fixtures
