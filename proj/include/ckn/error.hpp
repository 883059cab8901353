#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

/// Raised when inputs violate a documented precondition (bad exponents,
/// dimensions, ranges). The CLI maps it to exit code 1.
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails to deliver a result (singular
/// system, Newton divergence, bracketing failure). The CLI maps it to exit
/// code 2.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written; the message carries the path. The CLI
/// treats it like a configuration problem (exit code 1).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw domain_error(what);
}

}  // namespace detail
}  // namespace ckn
