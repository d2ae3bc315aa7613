#pragma once

#include <stdexcept>
#include <string>

namespace wordmask {

// Precondition or call-contract violation.
class ContractError : public std::runtime_error {
public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Byte-level format violation in an input file (WAV, JSON, ...).
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Text-level parse failure, carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

// File parsed but its structure is unusable (missing tier, empty tier, ...).
class StructureError : public std::runtime_error {
public:
  explicit StructureError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wordmask
