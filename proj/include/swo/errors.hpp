#pragma once

#include <stdexcept>
#include <string>

namespace swo {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// swf core
class InvalidUtilityVector : public Error { using Error::Error; };
class InvalidSpec : public Error { using Error::Error; };
class ZeroMeanError : public Error { using Error::Error; };
class ZeroMedianError : public Error { using Error::Error; };
class InvalidAlpha : public Error { using Error::Error; };
class LengthMismatch : public Error { using Error::Error; };
class UnsupportedFamily : public Error { using Error::Error; };

// allocation
class InvalidProblem : public Error { using Error::Error; };
class EmptyProblem : public Error { using Error::Error; };
class GridTooLarge : public Error { using Error::Error; };

// learning
class SingleClassData : public Error { using Error::Error; };
class NonFiniteLoss : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };

// data
class IoError : public Error { using Error::Error; };
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line, std::size_t field, const std::string& what)
      : Error("line " + std::to_string(line) + ", field " + std::to_string(field) + ": " + what),
        line_(line),
        field_(field) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::size_t field_;
};
class WrongRecordCount : public Error { using Error::Error; };
class UnknownCategoryCode : public Error { using Error::Error; };

// metrics
class EmptyGroup : public Error { using Error::Error; };
class NoQualifiedMembers : public Error { using Error::Error; };
class NoSelectedMembers : public Error { using Error::Error; };
class ZeroRequestTotal : public Error { using Error::Error; };
class ZeroSum : public Error { using Error::Error; };

// experiment harness
class ConfigError : public Error { using Error::Error; };

}  // namespace swo
