#pragma once

#include <stdexcept>
#include <string>

namespace dcsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidModeSet : Error {
  using Error::Error;
};
struct InvalidSelection : Error {
  using Error::Error;
};
struct InvalidCoupling : Error {
  using Error::Error;
};
struct InvalidRate : Error {
  using Error::Error;
};
struct WrongCase : Error {
  using Error::Error;
};
struct InvalidGrid : Error {
  using Error::Error;
};
struct InvalidParams : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Carries the offending field path so CLI errors point at the config entry.
struct ConfigError : Error {
  ConfigError(std::string field_path, const std::string& reason)
      : Error(field_path + ": " + reason), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace dcsim
