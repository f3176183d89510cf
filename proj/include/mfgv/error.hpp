// Copyright 2026 The mfgv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFGV_ERROR_HPP_
#define MFGV_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mfgv {

enum class ErrorCode {
  kInvalidArgument = 1,
  kOutOfRange = 2,
  kPreconditionViolation = 3,
  kConvergenceFailure = 4,
  kChainFailure = 5,
};

/// Base of every exception thrown by the library. The C API maps `code()`
/// to its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what)
      : Error(ErrorCode::kOutOfRange, what) {}
};

class PreconditionViolation : public Error {
 public:
  explicit PreconditionViolation(const std::string& what)
      : Error(ErrorCode::kPreconditionViolation, what) {}
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual)
      : Error(ErrorCode::kConvergenceFailure, what),
        last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

class ChainFailure : public Error {
 public:
  ChainFailure(const std::string& what, int failing_index, double residual)
      : Error(ErrorCode::kChainFailure, what),
        failing_index_(failing_index),
        residual_(residual) {}
  int failing_index() const { return failing_index_; }
  double residual() const { return residual_; }

 private:
  int failing_index_;
  double residual_;
};

}  // namespace mfgv

#endif  // MFGV_ERROR_HPP_
