#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace m3pipe {

// Error taxonomy maps onto CLI exit codes:
//   ValidationError -> 1, TransportError/ProtocolError -> 2, IntegrityError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, invalid values, unusable arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable or failing after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend reachable but returned a response violating the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// On-disk state does not match its recorded checksums or bindings.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Record parse failure; carries the 1-based line number within the shard.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::uint64_t line, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::uint64_t line() const { return line_; }

 private:
  std::string file_;
  std::uint64_t line_;
};

enum class ExitStatus : int {
  success = 0,
  validation_failure = 1,
  transport_failure = 2,
  integrity_failure = 3,
};

}  // namespace m3pipe
