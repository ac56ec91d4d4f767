#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

/// Base for every failure raised by the construction and its checks.
class BlowupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class QuadratureFailure : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

/// The polar frame is undefined at the origin.
class OriginFrame : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class RootNotBracketed : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class InjectivityFailure : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

/// A coefficient on the curve is not a function of the state.
class FactorizationFailure : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

/// Self-similar quantities only exist for t < 0.
class TimeDomain : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class StepRejection : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class Divergence : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class InsufficientSpan : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

}  // namespace blowup
