#pragma once

#include <stdexcept>
#include <string>

namespace inls {

// Process exit codes shared by the library status codes and the CLI.
enum class ExitCode : int {
  ok = 0,
  validation = 2,
  blowup = 3,
  io = 4,
  internal = 5,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string &what)
      : Error(ExitCode::validation, what) {}
};

// Parameters fall outside the hypotheses of the scattering theorem.
class RegimeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// No exponent witness was found within the halving budget.
class SearchExhausted : public ValidationError {
public:
  SearchExhausted(const std::string &what, std::string failing)
      : ValidationError(what), failing_(std::move(failing)) {}
  const std::string &failing_constraint() const noexcept { return failing_; }

private:
  std::string failing_;
};

class WindowTooShort : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error(ExitCode::io, what) {}
};

} // namespace inls
