#pragma once

#include <stdexcept>
#include <string>

namespace anoma {

enum class ErrorKind {
  format,     // malformed file or byte stream
  config,     // invalid parameter or configuration
  shape,      // extent mismatch between arguments
  fit,        // model cannot be fitted from the given data
  metric,     // metric undefined for the given inputs
  threshold,  // threshold search impossible
  layout,     // dataset directory layout violation
  pairing,    // image/mask pairing failure
  contract,   // value outside its documented domain
  io,         // filesystem failure
  usage,      // command-line misuse
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace anoma
