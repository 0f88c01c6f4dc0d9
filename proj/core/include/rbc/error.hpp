#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong magic number, bad header, unknown enum tag.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or cache written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Input shorter than its header declares.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// A value outside its permitted range (e.g. a label >= class count).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Requested more items than are available.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration parameter (non-positive temperature, empty grid, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions that do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t failed_epoch, std::size_t last_good_epoch)
      : Error(what), failed_epoch_(failed_epoch), last_good_epoch_(last_good_epoch) {}

  std::size_t failed_epoch() const noexcept { return failed_epoch_; }
  /// Number of fully completed epochs before divergence (0 if none).
  std::size_t last_good_epoch() const noexcept { return last_good_epoch_; }

 private:
  std::size_t failed_epoch_;
  std::size_t last_good_epoch_;
};

}  // namespace rbc
