#ifndef CEBIO_ERROR_HPP
#define CEBIO_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cebio {

/// Base class for all recoverable pipeline errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (wrong columns, bad labels, broken quoting, ...).
/// Carries the 1-based line number where the problem was detected, 0 if unknown.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& msg, std::size_t line = 0)
      : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Annotation does not line up with the text or tokenization
/// (span not found, span boundary inside a token, overlapping spans, ...).
class AlignmentError : public Error {
public:
  using Error::Error;
};

/// Semantic problems that are neither file-format nor alignment issues
/// (unknown instance id, empty training set, bad parameter values, ...).
class DataError : public Error {
public:
  using Error::Error;
};

}  // namespace cebio

#endif  // CEBIO_ERROR_HPP
