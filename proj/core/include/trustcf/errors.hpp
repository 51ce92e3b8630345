#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trustcf {

// Malformed input record. `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Rating value outside the configured domain or off the step grid.
class DomainError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Second rating for an already-seen (user, item) pair.
class DuplicateRatingError : public ParseError {
 public:
  using ParseError::ParseError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that cannot produce a result on the given data, e.g. tuning
// with no predictable validation ratings.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trustcf
