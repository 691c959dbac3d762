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

#include "refine/error.h"

namespace refine {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "syntax";
    case ErrorCode::kForwardReference: return "forward_reference";
    case ErrorCode::kNonContiguousSteps: return "non_contiguous_steps";
    case ErrorCode::kDivisionByZero: return "division_by_zero";
    case ErrorCode::kMissingBinding: return "missing_binding";
    case ErrorCode::kUnsatisfiable: return "unsatisfiable";
    case ErrorCode::kAmbiguous: return "ambiguous";
    case ErrorCode::kUnparseableNorm: return "unparseable_norm";
    case ErrorCode::kNotApplicable: return "perturbation_not_applicable";
    case ErrorCode::kInconsistentRecord: return "inconsistent_record";
    case ErrorCode::kMissingGold: return "missing_gold";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kEditSpaceExhausted: return "edit_space_exhausted";
    case ErrorCode::kUnknownFixture: return "unknown_fixture";
    case ErrorCode::kUnknownInstance: return "unknown_instance";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kInvariantViolation: return "invariant_violation";
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kMissingMarker: return "missing_marker";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kWrongState: return "wrong_state";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kInvalidFeedback: return "invalid_feedback";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace refine
