#pragma once

#include <stdexcept>
#include <string>

namespace unfactor {

// Error categories mirror the C API status codes.
enum class ErrorKind {
  Io,
  Config,
  Format,
  Checkpoint,
  Argument,
  Numeric,
  Unsupported,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error io_error(std::string msg) { return Error(ErrorKind::Io, std::move(msg)); }
inline Error config_error(std::string msg) { return Error(ErrorKind::Config, std::move(msg)); }
inline Error format_error(std::string msg) { return Error(ErrorKind::Format, std::move(msg)); }
inline Error checkpoint_error(std::string msg) { return Error(ErrorKind::Checkpoint, std::move(msg)); }
inline Error argument_error(std::string msg) { return Error(ErrorKind::Argument, std::move(msg)); }
inline Error numeric_error(std::string msg) { return Error(ErrorKind::Numeric, std::move(msg)); }
inline Error unsupported_error(std::string msg) { return Error(ErrorKind::Unsupported, std::move(msg)); }

}  // namespace unfactor
