// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sphaira {

// Every failure carries a short machine-greppable code. The CLI prints
// "error: <code>: <message>" on a single line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Bad argument or configuration value (E_PARAM).
struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error("E_PARAM", m) {}
};

// Malformed file content: bad token, bad header, wrong column count (E_PARSE).
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("E_PARSE", m) {}
};

// Well-formed file whose values violate a cloud invariant, e.g. a non-finite
// coordinate or a negative label (E_VALID).
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("E_VALID", m) {}
};

// Filesystem-level failure (E_IO).
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("E_IO", m) {}
};

// Model file or fingerprint problem (E_MODEL).
struct ModelError : Error {
  explicit ModelError(const std::string& m) : Error("E_MODEL", m) {}
};

// Training cannot proceed, e.g. single-class input (E_TRAIN).
struct TrainingError : Error {
  explicit TrainingError(const std::string& m) : Error("E_TRAIN", m) {}
};

}  // namespace sphaira
