#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lggnet {

// Base of every error the engine throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Extents that do not line up: tensor reshape, layer input, parameter files.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong order, e.g. backward without a cached forward.
class StateError : public Error {
 public:
  using Error::Error;
};

// Class index outside the label set.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Dataset could not be read or is unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { NotFound, VersionMismatch, Corrupt, ShapeMismatch };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Training produced a non-finite loss.
class DivergedError : public Error {
 public:
  DivergedError(std::size_t epoch, const std::string& what) : Error(what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace lggnet
