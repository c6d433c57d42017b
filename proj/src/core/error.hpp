#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kundt {

enum class ErrorKind {
  Syntax,            // malformed expression or document text
  UnknownIdentifier, // expression references an undeclared name
  Domain,            // evaluation singularity (division by zero, ln <= 0, ...)
  Shape,             // dimension / rank / variance mismatch
  JetOrder,          // a derivative was requested beyond the truncation order
  Singular,          // degenerate metric or non-invertible map
  Invalid,           // anything else the caller got wrong
};

/// Single exception type for the whole library; the C boundary maps
/// ErrorKind onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::size_t pos = npos)
      : std::runtime_error(std::move(message)), kind_(kind), pos_(pos) {}

  ErrorKind kind() const { return kind_; }

  /// Byte offset into the source text for parse errors, npos otherwise.
  std::size_t position() const { return pos_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  ErrorKind kind_;
  std::size_t pos_;
};

}  // namespace kundt
