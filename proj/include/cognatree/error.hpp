#pragma once

#include <stdexcept>
#include <string>

namespace cognatree {

// Invalid input data or a rejected domain condition (multi-state cell in a
// multi-valued matrix, star reference, leaf-set mismatch, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents; carries the offending location.
class ParseError : public DataError {
 public:
  ParseError(const std::string& where, const std::string& what)
      : DataError(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// The external inference engine failed or produced unusable output.
class EngineError : public std::runtime_error {
 public:
  EngineError(const std::string& what, std::string log_path = {})
      : std::runtime_error(what), log_path_(std::move(log_path)) {}
  const std::string& log_path() const noexcept { return log_path_; }

 private:
  std::string log_path_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cognatree
