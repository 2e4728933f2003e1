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

#ifndef JOINSYNTH_INSTANCE_IO_HPP_
#define JOINSYNTH_INSTANCE_IO_HPP_

#include <string>
#include <string_view>

#include "joinsynth/relational.hpp"

namespace joinsynth {

// JSON instance format:
//   {"attributes": [{"name": "A", "domain_size": 4, "values": [...]?}, ...],
//    "relations": [{"schema": ["A", "B"], "tuples": [[v..., freq], ...]}, ...]}
// Tuple values are integers in [0, domain_size) or, when "values" labels are
// given for an attribute, either the label string or its index. Schema order
// in the file is free; tuples are permuted into canonical attribute order.
// Repeated tuples accumulate.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

std::string instance_to_json(const Instance& instance, int indent = -1);
void save_instance(const Instance& instance, const std::string& path);

}  // namespace joinsynth

#endif  // JOINSYNTH_INSTANCE_IO_HPP_
