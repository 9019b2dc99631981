#pragma once

#include <stdexcept>
#include <string>

namespace coplan {

// Error taxonomy shared by the library, the C interface and the command line
// front end. The numeric values line up with the CLI exit codes where one
// exists (usage 2, infeasible 3, config 4).
enum class ErrorCode {
  Usage = 2,       // caller broke a contract (bad arguments, bad call order)
  Infeasible = 3,  // a well formed problem has no solution
  Config = 4,      // malformed or inconsistent input data
  Io = 5,          // file system problems
  Internal = 6,    // invariant violation inside the library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coplan
