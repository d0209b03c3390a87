#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace camsel {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value. `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Collinear or coincident points handed to a minimal solver.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class EmptySamples : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NoDataForPlace : public Error {
 public:
  explicit NoDataForPlace(int place_id)
      : Error("no camera has pose-error samples for place " + std::to_string(place_id)),
        place_id_(place_id) {}

  int place_id() const noexcept { return place_id_; }

 private:
  int place_id_;
};

// Malformed text artifact. Carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace camsel
