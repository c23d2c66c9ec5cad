#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace propl {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed proposition text. `offset` is the byte offset of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class CodecError : public Error {
 public:
  using Error::Error;
};

/// Tactic text outside the accepted surface grammar.
class GrammarError : public Error {
 public:
  using Error::Error;
};

class TraceFormatError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace propl
