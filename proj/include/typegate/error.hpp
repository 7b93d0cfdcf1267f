#pragma once

#include <stdexcept>
#include <string>

namespace typegate {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Lex,
  Parse,
  UnsupportedSyntax,
  Schema,
  NoSite,
  NoReplacementPool,
  UnlabeledSample,
  MissingOutcome,
  Protocol,
  DetectorCrashed,
  Timeout,
  NoCrossover,
  Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Lexing, parsing and unsupported-construct failures. Line is 1-based,
// column 0-based with tabs expanded to 8.
class SyntaxError : public Error {
 public:
  SyntaxError(ErrorCode code, const std::string& message, int line, int column)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace typegate
