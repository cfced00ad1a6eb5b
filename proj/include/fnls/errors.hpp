#pragma once

#include <stdexcept>
#include <string>

namespace fnls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, potential, solver or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Gram matrix of an orbital frame is numerically singular.
class DegenerateFrameError : public Error {
 public:
  DegenerateFrameError(const std::string& what, double smallest_eigenvalue)
      : Error(what), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

/// Malformed snapshot or record file (bad magic, version or length).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Iterative method stopped before meeting its tolerance. Subclasses carry
/// the best iterate.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace fnls
