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

#include "joinsynth/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "joinsynth/error.hpp"
#include "json.hpp"

namespace joinsynth {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& message) {
  throw Error(ErrorCode::kParseError, message);
}

std::size_t LineOf(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + byte, '\n'));
}

const json& Field(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) Fail(where + " must be an object");
  auto it = object.find(key);
  if (it == object.end()) Fail(where + " is missing \"" + key + "\"");
  return *it;
}

Value ParseValue(const json& v, const Attribute& attribute,
                 const std::unordered_map<std::string, Value>& labels,
                 const std::string& where) {
  if (v.is_string()) {
    auto it = labels.find(v.get<std::string>());
    if (it == labels.end()) {
      Fail(where + ": unknown label \"" + v.get<std::string>() + "\" for " +
           attribute.name);
    }
    return it->second;
  }
  if (!v.is_number_integer()) Fail(where + ": tuple values must be integers");
  const auto x = v.get<std::int64_t>();
  if (x < 0 || x >= static_cast<std::int64_t>(attribute.domain_size)) {
    Fail(where + ": value " + std::to_string(x) + " outside dom(" +
         attribute.name + ")");
  }
  return static_cast<Value>(x);
}

Instance FromJson(const json& doc) {
  if (!doc.is_object()) Fail("instance must be a JSON object");
  const json& attrs = Field(doc, "attributes", "instance");
  if (!attrs.is_array() || attrs.empty()) Fail("\"attributes\" must be a non-empty array");
  std::vector<Attribute> attributes;
  std::vector<std::unordered_map<std::string, Value>> labels;
  for (std::size_t x = 0; x < attrs.size(); ++x) {
    const std::string where = "attributes[" + std::to_string(x) + "]";
    const json& name = Field(attrs[x], "name", where);
    const json& size = Field(attrs[x], "domain_size", where);
    if (!name.is_string()) Fail(where + ".name must be a string");
    if (!size.is_number_integer() || size.get<std::int64_t>() < 1 ||
        size.get<std::int64_t>() > 0xffffffffLL) {
      Fail(where + ".domain_size must be a positive integer");
    }
    attributes.push_back({name.get<std::string>(),
                          static_cast<std::uint32_t>(size.get<std::int64_t>())});
    auto& map = labels.emplace_back();
    if (auto it = attrs[x].find("values"); it != attrs[x].end()) {
      if (!it->is_array() || it->size() != attributes.back().domain_size) {
        Fail(where + ".values must list exactly domain_size labels");
      }
      for (std::size_t v = 0; v < it->size(); ++v) {
        if (!(*it)[v].is_string()) Fail(where + ".values must be strings");
        map.emplace((*it)[v].get<std::string>(), static_cast<Value>(v));
      }
    }
  }

  const json& rels = Field(doc, "relations", "instance");
  if (!rels.is_array() || rels.empty()) Fail("\"relations\" must be a non-empty array");
  std::vector<std::vector<std::string>> schemas;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    const std::string where = "relations[" + std::to_string(i) + "]";
    const json& schema = Field(rels[i], "schema", where);
    if (!schema.is_array()) Fail(where + ".schema must be an array");
    auto& names = schemas.emplace_back();
    for (const json& n : schema) {
      if (!n.is_string()) Fail(where + ".schema entries must be strings");
      names.push_back(n.get<std::string>());
    }
  }

  JoinQuery query(attributes, schemas);
  Instance instance(query);
  for (std::size_t i = 0; i < rels.size(); ++i) {
    const std::string where = "relations[" + std::to_string(i) + "]";
    std::vector<std::size_t> file_order;
    for (const auto& n : schemas[i]) file_order.push_back(query.attribute_index(n));
    const auto& canonical = query.schema(i);
    const json& tuples = Field(rels[i], "tuples", where);
    if (!tuples.is_array()) Fail(where + ".tuples must be an array");
    for (std::size_t r = 0; r < tuples.size(); ++r) {
      const std::string row = where + ".tuples[" + std::to_string(r) + "]";
      const json& t = tuples[r];
      if (!t.is_array() || t.size() != file_order.size() + 1) {
        Fail(row + " must hold " + std::to_string(file_order.size()) +
             " values and a frequency");
      }
      Tuple tuple(canonical.size());
      for (std::size_t p = 0; p < file_order.size(); ++p) {
        const std::size_t x = file_order[p];
        const auto slot = std::find(canonical.begin(), canonical.end(), x) -
                          canonical.begin();
        tuple[static_cast<std::size_t>(slot)] =
            ParseValue(t[p], query.attribute(x), labels[x], row);
      }
      const json& f = t.back();
      if (!f.is_number_integer() || f.get<std::int64_t>() < 1) {
        Fail(row + ": frequency must be a positive integer");
      }
      instance.add(i, tuple, f.get<std::int64_t>());
    }
  }
  return instance;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    Fail("line " + std::to_string(LineOf(text, e.byte == 0 ? 0 : e.byte - 1)) +
         ": " + e.what());
  }
  try {
    return FromJson(doc);
  } catch (const json::exception& e) {
    Fail(e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string instance_to_json(const Instance& instance, int indent) {
  const JoinQuery& q = instance.query();
  json doc;
  doc["attributes"] = json::array();
  for (const auto& a : q.attributes()) {
    doc["attributes"].push_back({{"name", a.name}, {"domain_size", a.domain_size}});
  }
  doc["relations"] = json::array();
  for (std::size_t i = 0; i < q.num_relations(); ++i) {
    json rel;
    rel["schema"] = json::array();
    for (std::size_t x : q.schema(i)) rel["schema"].push_back(q.attribute(x).name);
    rel["tuples"] = json::array();
    for (const auto& [t, f] : instance.relation(i).support()) {
      json row = json::array();
      for (Value v : t) row.push_back(v);
      row.push_back(f);
      rel["tuples"].push_back(std::move(row));
    }
    doc["relations"].push_back(std::move(rel));
  }
  return doc.dump(indent);
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << instance_to_json(instance, 1) << '\n';
}

}  // namespace joinsynth
