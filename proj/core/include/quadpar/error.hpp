// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace quadpar {

/// Base class of every exception thrown by quadpar.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid factors, cluster description, or missing bandwidth entry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Matrix dimensions incompatible with the grid or with each other.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Collective called with inconsistent participant data, or an operand
/// distributed differently than the operation expects.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// No grid configuration satisfies the requested constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadpar
