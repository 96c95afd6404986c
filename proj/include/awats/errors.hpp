#pragma once

#include <stdexcept>
#include <string>

namespace awats {

// Process exit codes used by the CLI. Every library error maps onto one.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kValidation = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// Bad flags, bad hyperparameters, infeasible generator settings.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

// Anything wrong with input data: files, shapes, labels, values.
class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
};

class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedTypeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TruncationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyRoiError : public ValidationError {
 public:
  EmptyRoiError(int label)
      : ValidationError("ROI label " + std::to_string(label) +
                        " has no voxels"),
        label_(label) {}
  int label() const noexcept { return label_; }

 private:
  int label_;
};

// Domain violations of mathematical preconditions (empty vectors, too few
// points, and the like).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Training divergence and other non-finite numeric failures.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumeric; }
};

}  // namespace awats
