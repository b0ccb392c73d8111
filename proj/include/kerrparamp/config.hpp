#pragma once

#include <string>
#include <vector>

#include "kerrparamp/analysis.hpp"
#include "kerrparamp/circuit.hpp"
#include "kerrparamp/kerr_solver.hpp"

namespace kerrparamp {

/// Validated run configuration. Frequencies are already angular here.
struct RunConfig {
  CircuitSpec circuit;
  double kerr_scale = 1.0;

  double gain_target_db = 20.0;
  std::vector<double> epsilons;            ///< rad/s, sorted
  std::vector<double> signal_dbm;          ///< saturation sweep, increasing
  std::vector<double> contour_signal_dbm;  ///< bias-contour family
  std::vector<double> np_fractions;        ///< gain-map rows, fractions of the eps = 0 critical pump

  ContinuationPolicy policy;
  OptimaSettings optima;
  std::vector<double> kerr_scales{1.0, 0.1, 0.0};

  std::string output_dir = "out";
  int precision = 10;
  std::string notes;

  double gain_target() const;
};

/// Throws SchemaError (with key path) or UnitError.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Mode parameters for the config, Kerr scale applied.
ModeParams config_params(const RunConfig& cfg);

}  // namespace kerrparamp
