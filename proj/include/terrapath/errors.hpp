#pragma once

#include <stdexcept>
#include <string>

namespace terrapath {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FileNotFoundError : Error {
  explicit FileNotFoundError(const std::string& path)
      : Error("file not found: " + path) {}
};

struct IoError : Error {
  using Error::Error;
};

// Parse failure with a 1-based line number (0 = not line specific).
struct FormatError : Error {
  FormatError(const std::string& msg, std::size_t line = 0)
      : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  std::size_t line_number;
};

struct EmptyCloudError : Error {
  EmptyCloudError() : Error("point cloud is empty") {}
};

struct InvalidTransformError : Error {
  using Error::Error;
};

struct InvalidSpecError : Error {
  using Error::Error;
};

struct DegenerateCellError : Error {
  DegenerateCellError() : Error("plane fit needs >= 3 non-collinear points") {}
};

struct DegenerateProjectionError : Error {
  using Error::Error;
};

struct VersionMismatchError : Error {
  using Error::Error;
};

struct CorruptFileError : Error {
  using Error::Error;
};

}  // namespace terrapath
