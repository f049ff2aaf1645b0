#pragma once

#include <stdexcept>
#include <string>

namespace nrsim {

// Field out of its declared range, on encode or after decode.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wire bytes that cannot be a message of the expected type.
class MalformedMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionViolated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NotCamped : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoCellAvailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContentionLost : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario rejected during parsing or validation. `field()` is the dotted
/// path of the offending key, e.g. `cells[1].attack.delta_units`; for syntax
/// errors it is empty and line/column are set instead.
class ConfigInvalid : public std::runtime_error {
 public:
  ConfigInvalid(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  ConfigInvalid(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string field_;
  int line_ = 0;
  int column_ = 0;
};

// Unparseable or truncated events.log.
class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t line, std::size_t lastGoodLine, const std::string& message)
      : std::runtime_error("events log line " + std::to_string(line) + ": " + message +
                           " (last good line " + std::to_string(lastGoodLine) + ")"),
        line_(line),
        lastGoodLine_(lastGoodLine) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t lastGoodLine() const noexcept { return lastGoodLine_; }

 private:
  std::size_t line_;
  std::size_t lastGoodLine_;
};

}  // namespace nrsim
