#pragma once

#include <stdexcept>
#include <string>

namespace s2r {

/// Broken input contract: bad files, bad arguments, malformed configs.
/// The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure on otherwise valid input. The CLI maps it to exit code 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace s2r
