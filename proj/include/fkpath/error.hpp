#ifndef FKPATH_ERROR_HPP
#define FKPATH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fkpath {

enum class ErrorKind {
  degenerate_measure,
  dimension,
  degenerate_step,
  enumeration_too_large,
  horizon_exceeded,
  degenerate_particle_system,
  stability_violated,
  invalid_argument,
  config,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was broken without string matching.
class FkError : public std::runtime_error {
 public:
  FkError(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fkpath

#endif  // FKPATH_ERROR_HPP
