#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vmrd {

/// Malformed input. Carries the full violation list so callers can print
/// one violation per line.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  explicit ValidationError(const std::string& violation)
      : ValidationError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A size exceeded a configured or representable limit (codetree count,
/// codebook size, table size).
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite intermediate or an unrecoverable numerical failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vmrd
