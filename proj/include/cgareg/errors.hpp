#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgareg {

// Base of everything the library throws. The CLI maps UsageError (and its
// subclasses) to exit code 1 and NumericalError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ParseError : public UsageError {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : UsageError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NormalizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AmbiguousRotationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndeterminedTranslationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ExactTranslationUnavailable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegeneratePointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace cgareg
