#pragma once

#include <stdexcept>
#include <string>

namespace esakit {

/// Operand dimensions disagree (matrix shapes, raster sizes, layouts).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value lies outside the domain an operation accepts.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An index is out of range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A theorem clause was requested on inputs for which it is vacuous.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Something that cannot happen for valid inputs did happen.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; the message names the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The mesh covered no pixel of the canvas.
class DegenerateRenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace esakit
