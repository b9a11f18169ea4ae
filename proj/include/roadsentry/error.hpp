#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roadsentry {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or unreadable input: files, records, calibration samples, configs.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical or geometric step could not produce a result from valid input.
class ProcessingError : public Error {
 public:
  using Error::Error;
};

enum class LaneSide { Left, Right };

const char* to_string(LaneSide side) noexcept;

// vision-prep

class NonConvergence : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

class DegenerateQuad : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

// lane-model

class MissingLane : public ProcessingError {
 public:
  explicit MissingLane(LaneSide side);
  LaneSide side() const noexcept { return side_; }

 private:
  LaneSide side_;
};

class InsufficientPixels : public ProcessingError {
 public:
  InsufficientPixels(LaneSide side, std::size_t found);
  LaneSide side() const noexcept { return side_; }

 private:
  LaneSide side_;
};

class SelfIntersecting : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

// detection-io

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line_no, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonMonotonicFrame : public DataError {
 public:
  explicit NonMonotonicFrame(std::size_t line_no);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Detection-stream failure re-thrown by the pipeline with frame context.
class StreamError : public DataError {
 public:
  using DataError::DataError;
};

// depth-model

class NonPositiveSample : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateData : public DataError {
 public:
  using DataError::DataError;
};

class NonPositiveArea : public DataError {
 public:
  using DataError::DataError;
};

/// Model output below the physical floor; carries the raw prediction.
class NotPhysical : public ProcessingError {
 public:
  explicit NotPhysical(double predicted);
  double predicted() const noexcept { return predicted_; }

 private:
  double predicted_;
};

// safety-rule

class NonPositiveDistance : public DataError {
 public:
  using DataError::DataError;
};

class MissingSpeed : public DataError {
 public:
  using DataError::DataError;
};

// eval-harness

class EmptyEvaluation : public DataError {
 public:
  using DataError::DataError;
};

class InvalidSpec : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace roadsentry
