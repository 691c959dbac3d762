// Copyright 2026 The refine-loop Authors
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

#ifndef REFINE_ERROR_H_
#define REFINE_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace refine {

// Machine-readable failure categories. The CLI and the session service map
// these onto exit codes and response codes.
enum class ErrorCode {
  kSyntax,
  kForwardReference,
  kNonContiguousSteps,
  kDivisionByZero,
  kMissingBinding,
  kUnsatisfiable,
  kAmbiguous,
  kUnparseableNorm,
  kNotApplicable,
  kInconsistentRecord,
  kMissingGold,
  kTransport,
  kTimeout,
  kEditSpaceExhausted,
  kUnknownFixture,
  kUnknownInstance,
  kVersionMismatch,
  kInvariantViolation,
  kMalformedRecord,
  kMissingMarker,
  kInvalidConfig,
  kWrongState,
  kNotFound,
  kInvalidFeedback,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(message), code_(code), position_(position) {}

  ErrorCode code() const { return code_; }

  // Character offset for syntax errors, step index for execution errors,
  // line number for file loaders. Empty when not meaningful.
  std::optional<std::size_t> position() const { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace refine

#endif  // REFINE_ERROR_H_
