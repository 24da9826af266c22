#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qrm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad radius, empty partition, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (mesh file, data file, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A factorization or solve failed. `row()` carries the offending pivot
/// row when the backend reports one.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> row = std::nullopt)
      : Error(what), row_(row) {}

  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

}  // namespace qrm
