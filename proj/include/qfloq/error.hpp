#pragma once

#include <stdexcept>
#include <string>

namespace qfloq {

// Status values double as CLI exit codes (0/2/3/4); ChiCapExceeded is a
// flagged stop, not a failure — the CLI reports it and exits 0.
enum class Status : int {
  Ok = 0,
  ConfigError = 2,
  VerifyError = 3,
  EngineError = 4,
  ChiCapExceeded = 5,
};

class Error : public std::runtime_error {
 public:
  Error(Status code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  Status code() const { return code_; }

 private:
  Status code_;
};

}  // namespace qfloq
