#pragma once

#include <stdexcept>
#include <string>

namespace maxcorr {

// Coarse error taxonomy; the CLI maps each kind to its own exit code.
enum class ErrorKind {
  config,          // malformed or inconsistent user input
  data,            // unusable data: parse failures, degeneracy, collinearity
  infeasible,      // empty feasible region or unreachable target
  nonconvergence,  // optimizer ran out of iterations
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& what) {
  throw Error(ErrorKind::config, what);
}

[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorKind::data, what);
}

}  // namespace maxcorr
