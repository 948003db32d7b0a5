#ifndef NVGYRO_ERROR_HPP
#define NVGYRO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nvgyro {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters or configuration that violate a documented invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be interpreted (zero denominators, corrupt rows).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The four-point secants no longer straddle the tracked line.
class OutOfBandError : public Error {
 public:
  using Error::Error;
};

/// Block scheduling went backwards in time.
class SchedulingError : public Error {
 public:
  using Error::Error;
};

/// A sinusoid fit or polynomial fit could not be carried out.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems; carries the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace nvgyro

#endif
