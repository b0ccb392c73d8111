#pragma once

#include <stdexcept>
#include <string>

namespace kerrparamp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// circuit
struct FluxSingularity : Error { using Error::Error; };
struct NonPhysical : Error { using Error::Error; };
struct StepSizeFailure : Error { using Error::Error; };

// linear / kerr solvers
struct CriticalPoint : Error { using Error::Error; };
struct BracketFailure : Error { using Error::Error; };
struct FitDiverged : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };

// analysis
struct NoSolution : Error { using Error::Error; };
struct EmptyCandidateSet : Error { using Error::Error; };
struct MalformedCurve : Error { using Error::Error; };

// config
struct ConfigError : Error { using Error::Error; };

struct SchemaError : ConfigError {
  SchemaError(const std::string& key_path, const std::string& what)
      : ConfigError(key_path + ": " + what), path(key_path) {}
  std::string path;
};

struct UnitError : ConfigError {
  UnitError(const std::string& key_path, const std::string& what)
      : ConfigError(key_path + ": " + what), path(key_path) {}
  std::string path;
};

}  // namespace kerrparamp
