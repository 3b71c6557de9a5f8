#pragma once

#include <stdexcept>
#include <string>

namespace mfc {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model parameter is outside its admissible domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A call argument violates the operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Circulant embedding is not nonnegative-definite beyond the clipping budget.
class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the requested cascade depth or dyadic level.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NormalizerError : public Error {
 public:
  using Error::Error;
};

class MomentError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfc
