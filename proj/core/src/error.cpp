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

#include "joinsynth/error.hpp"

namespace joinsynth {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kSupportTooLarge:
      return "SupportTooLarge";
    case ErrorCode::kDomainTooLarge:
      return "DomainTooLarge";
    case ErrorCode::kAttributeNotInSchema:
      return "AttributeNotInSchema";
    case ErrorCode::kWrongArity:
      return "WrongArity";
    case ErrorCode::kSchemaNotTwoTableChain:
      return "SchemaNotTwoTableChain";
    case ErrorCode::kNotHierarchical:
      return "NotHierarchical";
    case ErrorCode::kConfigDomainMismatch:
      return "ConfigDomainMismatch";
    case ErrorCode::kNonFiniteScore:
      return "NonFiniteScore";
    case ErrorCode::kDegenerateFamily:
      return "DegenerateFamily";
    case ErrorCode::kBadInterval:
      return "BadInterval";
    case ErrorCode::kNonPower:
      return "NonPower";
    case ErrorCode::kInfeasibleDelta:
      return "InfeasibleDelta";
    case ErrorCode::kInfeasibleVector:
      return "InfeasibleVector";
    case ErrorCode::kInfeasibleSpec:
      return "InfeasibleSpec";
    case ErrorCode::kParseError:
      return "ParseError";
  }
  return "Unknown";
}

}  // namespace joinsynth
