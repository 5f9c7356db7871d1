#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sppq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution does not fit inside the requested photon-number truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside its mathematical domain (efficiency > 1, negative rate, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A ratio estimator was asked for with a zero denominator.
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, e.g. a time-tag stream that is not sorted.
class InputError : public Error {
 public:
  using Error::Error;
};

class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

class DataInconsistencyError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// The requested stripe width is below the mode cutoff.
class CutoffError : public Error {
 public:
  using Error::Error;
};

/// File parse failure. `offset()` is the byte offset at which reading failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Invalid scenario configuration; `field()` names the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sppq
