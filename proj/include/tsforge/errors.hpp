#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsforge {

// Base class for every failure the generator surfaces to callers.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Equation text could not be parsed. `position` is a 0-based character
// offset into the input string.
class ParseError : public Error {
 public:
  enum class Kind { Syntax, UnknownVariable, ZeroLag, UnknownFunction };

  ParseError(Kind kind, std::size_t position, const std::string& message)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        kind_(kind),
        position_(position) {}

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

// Invalid or inconsistent configuration input.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : Error("config field '" + field + "': " + reason), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Parameters that cannot produce a valid graph or dataset.
class InfeasibleParams : public Error {
 public:
  using Error::Error;
};

// Anomaly windows could not be placed disjointly on their variables.
class SchedulingFailed : public Error {
 public:
  using Error::Error;
};

// A re-roll limit was hit while generating a function.
class GenerationExhausted : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading or writing dataset files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsforge
