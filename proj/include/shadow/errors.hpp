#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace shadow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// Caller supplied inconsistent input (dimension mismatch, unknown name, ...).
class InputError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "input"; }
};

/// Model parameters outside their valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "parameter"; }
};

/// A state left the finite/bounded region while time stepping.
class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] const char* kind() const noexcept override { return "numerical-blowup"; }

 private:
  std::size_t step_;
};

/// QR of a rank-deficient basis.
class DegenerateBasis : public Error {
 public:
  DegenerateBasis(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] const char* kind() const noexcept override { return "degenerate-basis"; }

 private:
  std::size_t step_;
};

/// Configuration validation failure. Carries every offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : Error(what), keys_(std::move(keys)) {}
  [[nodiscard]] const std::vector<std::string>& keys() const noexcept { return keys_; }
  [[nodiscard]] const char* kind() const noexcept override { return "config"; }

 private:
  std::vector<std::string> keys_;
};

}  // namespace shadow
