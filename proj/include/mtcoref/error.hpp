#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtcoref {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, positioned at a 1-based line (0 when not line-oriented).
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& reason)
      : Error(format(source, line, reason)), source_(std::move(source)), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& reason) {
    std::string out = source.empty() ? std::string("<input>") : source;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + reason;
  }

  std::string source_;
  std::size_t line_;
};

/// Input that parses but violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A metric or aggregation that is undefined on the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// File-system or network failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtcoref
