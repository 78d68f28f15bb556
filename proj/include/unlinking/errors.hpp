#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unlinking {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed polynomial text; position is a 0-based byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), message_(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }
  /// The description without the position suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

/// Well-formed text that does not match a document schema (JSON field types, arity header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Arity, length or ambient-dimension mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold (p(0) != 0, samples < 2, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed; indicates a bug upstream.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace unlinking
