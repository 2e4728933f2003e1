// Copyright 2026 The joinsynth Authors
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

#ifndef JOINSYNTH_ERROR_HPP_
#define JOINSYNTH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace joinsynth {

enum class ErrorCode {
  kInvalidArgument,
  kSupportTooLarge,
  kDomainTooLarge,
  kAttributeNotInSchema,
  kWrongArity,
  kSchemaNotTwoTableChain,
  kNotHierarchical,
  kConfigDomainMismatch,
  kNonFiniteScore,
  kDegenerateFamily,
  kBadInterval,
  kNonPower,
  kInfeasibleDelta,
  kInfeasibleVector,
  kInfeasibleSpec,
  kParseError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as joinsynth::Error; code() identifies the
// failure class so callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace joinsynth

#endif  // JOINSYNTH_ERROR_HPP_
