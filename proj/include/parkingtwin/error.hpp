#pragma once

#include <stdexcept>
#include <string>

namespace parkingtwin {

enum class ErrorKind {
  Parse,       // malformed input document
  Structural,  // well-formed but inconsistent (dangling refs, dim mismatch)
  Parameter,   // out-of-range argument
  Config,      // bad or conflicting configuration
  Domain,      // math precondition violated (e.g. non-positive depth)
  Io,          // filesystem failure
  Geometry,    // empty or degenerate geometry
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Input-side failures map to CLI exit code 1; everything else is internal.
inline bool is_input_error(ErrorKind kind) {
  return kind != ErrorKind::Geometry;
}

}  // namespace parkingtwin
