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

#include "joinsynth/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "joinsynth/error.hpp"

namespace joinsynth {

namespace {

void CheckTable(const SingleTable& table) {
  if (table.frequency.empty()) {
    throw Error(ErrorCode::kInfeasibleSpec, "single table has an empty domain");
  }
  for (Frequency f : table.frequency) {
    if (f < 0) throw Error(ErrorCode::kInfeasibleSpec, "negative single-table frequency");
  }
  if (table.n() < 1) throw Error(ErrorCode::kInfeasibleSpec, "single table has n = 0");
}

std::uint32_t CheckedDomain(std::uint64_t size, const char* what) {
  if (size == 0 || size > kDefaultSupportCap) {
    throw Error(ErrorCode::kSupportTooLarge,
                std::string(what) + " needs " + std::to_string(size) + " values");
  }
  return static_cast<std::uint32_t>(size);
}

// Owner a of every reachable slice value, in (a, j) order.
std::vector<std::uint32_t> SliceOwners(const SingleTable& table) {
  std::vector<std::uint32_t> owner;
  for (std::uint32_t a = 0; a < table.domain_size(); ++a) {
    for (Frequency j = 0; j < table.frequency[a]; ++j) owner.push_back(a);
  }
  return owner;
}

std::uint64_t IntegerRoot(std::uint64_t value, std::size_t k) {
  auto power_le = [&](std::uint64_t r) {
    std::uint64_t p = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (p > value / r) return false;
      p *= r;
    }
    return p <= value;
  };
  std::uint64_t r = static_cast<std::uint64_t>(
      std::floor(std::pow(static_cast<double>(value), 1.0 / static_cast<double>(k))));
  while (r > 0 && !power_le(r)) --r;
  while (power_le(r + 1)) ++r;
  return r;
}

JoinQuery ChainQuery(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  return JoinQuery({{"A", a}, {"B", b}, {"C", c}},
                   std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}});
}

}  // namespace

Frequency SingleTable::n() const {
  Frequency total = 0;
  for (Frequency f : frequency) total += f;
  return total;
}

double SingleTable::answer(std::span<const double> q) const {
  double total = 0.0;
  for (std::size_t a = 0; a < frequency.size(); ++a) {
    total += q[a] * static_cast<double>(frequency[a]);
  }
  return total;
}

double f_lower(double domain_size, double epsilon) {
  return std::sqrt(std::sqrt(std::log2(domain_size)) / epsilon);
}

double f_upper(double domain_size, double family_size, double epsilon, double delta) {
  return f_lower(domain_size, epsilon) *
         std::sqrt(std::log2(family_size) * std::log2(1.0 / delta));
}

double error_envelope_two_table(double count, double delta, double lambda,
                                double f_upper_value) {
  const double width = delta + lambda;
  return (std::sqrt(count * width) + width * std::sqrt(lambda)) * f_upper_value;
}

GeneratedInstance gen_two_table_lb(const SingleTable& table, std::uint32_t delta) {
  CheckTable(table);
  if (delta == 0) throw Error(ErrorCode::kInfeasibleDelta, "delta must be >= 1");
  const auto owner = SliceOwners(table);
  const std::uint32_t n = CheckedDomain(owner.size(), "dom(B)");
  GeneratedInstance out;
  out.instance = Instance(ChainQuery(table.domain_size(), n, delta));
  for (std::uint32_t b = 0; b < n; ++b) {
    out.instance.add(0, {owner[b], b});
    for (std::uint32_t c = 0; c < delta; ++c) out.instance.add(1, {b, c});
  }
  const double d = table.domain_size();
  out.count = static_cast<Frequency>(n) * delta;
  out.local_sensitivity = delta;
  out.nominal_domain_size = d * (d * static_cast<double>(n)) * delta;
  out.description = "lb2 n=" + std::to_string(n) + " delta=" + std::to_string(delta);
  return out;
}

std::size_t encoding_relation(const JoinQuery& query) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < query.num_relations(); ++i) {
    if (query.schema(i).size() < query.schema(best).size()) best = i;
  }
  return best;
}

GeneratedInstance gen_multi_table_lb(const JoinQuery& query, const SingleTable& table,
                                     std::uint64_t delta) {
  CheckTable(table);
  const std::size_t first = encoding_relation(query);
  const AttributeSet encoded = query.schema_set(first);
  const std::size_t k =
      query.num_attributes() - static_cast<std::size_t>(PopCount(encoded));
  if (k == 0) {
    throw Error(ErrorCode::kInfeasibleDelta, "every attribute lies in the encoding relation");
  }
  const std::uint64_t r = IntegerRoot(delta, k);
  if (r == 0) throw Error(ErrorCode::kInfeasibleDelta, "delta must be >= 1");
  std::uint64_t achieved = 1;
  for (std::size_t i = 0; i < k; ++i) achieved *= r;

  const auto owner = SliceOwners(table);
  const std::uint32_t n = CheckedDomain(owner.size(), "encoded attributes");
  const std::uint32_t side = CheckedDomain(r, "free attributes");
  std::vector<Attribute> attributes = query.attributes();
  for (std::size_t x = 0; x < attributes.size(); ++x) {
    attributes[x].domain_size = (encoded >> x) & 1 ? n : side;
  }
  std::vector<std::vector<std::size_t>> schemas;
  for (std::size_t i = 0; i < query.num_relations(); ++i) schemas.push_back(query.schema(i));
  JoinQuery sliced(attributes, schemas);

  GeneratedInstance out;
  out.instance = Instance(sliced);
  for (std::uint32_t v = 0; v < n; ++v) {
    out.instance.add(first, Tuple(sliced.schema(first).size(), v));
  }
  for (std::size_t i = 0; i < sliced.num_relations(); ++i) {
    if (i == first) continue;
    const std::uint64_t size = sliced.relation_domain_size(i);
    if (size > kDefaultSupportCap) {
      throw Error(ErrorCode::kSupportTooLarge,
                  "relation " + std::to_string(i + 1) + " needs " + std::to_string(size) +
                      " tuples");
    }
    for (std::uint64_t idx = 0; idx < size; ++idx) {
      out.instance.add(i, sliced.relation_tuple(i, idx));
    }
  }
  out.count = static_cast<Frequency>(n) * static_cast<Frequency>(achieved);
  out.local_sensitivity = static_cast<Frequency>(achieved);
  out.nominal_domain_size =
      std::pow(static_cast<double>(table.domain_size()) * n, PopCount(encoded)) *
      static_cast<double>(achieved);
  out.description = "lbmulti n=" + std::to_string(n) + " delta=" + std::to_string(achieved);
  return out;
}

GeneratedInstance gen_staircase(std::uint32_t sqrt_n) {
  if (sqrt_n == 0) throw Error(ErrorCode::kInfeasibleSpec, "sqrt_n must be >= 1");
  GeneratedInstance out;
  out.instance = Instance(ChainQuery(sqrt_n, sqrt_n, sqrt_n));
  for (std::uint32_t i = 1; i <= sqrt_n; ++i) {
    const Value b = i - 1;
    for (Value v = 0; v < i; ++v) {
      out.instance.add(0, {v, b});
      out.instance.add(1, {b, v});
    }
    out.count += static_cast<Frequency>(i) * i;
  }
  out.local_sensitivity = sqrt_n;
  out.nominal_domain_size = std::pow(static_cast<double>(sqrt_n), 3);
  out.description = "staircase sqrt_n=" + std::to_string(sqrt_n);
  return out;
}

GeneratedInstance gen_gap(std::uint64_t k) {
  int j = 0;
  std::uint64_t p = 1;
  while (p < k && p <= std::numeric_limits<std::uint64_t>::max() / 8) {
    p *= 8;
    ++j;
  }
  if (k == 0 || p != k) {
    throw Error(ErrorCode::kNonPower, std::to_string(k) + " is not a power of 8");
  }
  const int classes = 2 * j;  // (2/3) log2 k
  const std::uint64_t side = std::uint64_t{1} << classes;  // k^(2/3)
  std::uint64_t values = 0;
  for (int i = 0; i <= classes; ++i) values += (k * k) >> (3 * i);
  const std::uint32_t b_size = CheckedDomain(values, "dom(B)");
  const std::uint32_t a_size = CheckedDomain(side, "dom(A)");
  GeneratedInstance out;
  out.instance = Instance(ChainQuery(a_size, b_size, a_size));
  Value b = 0;
  for (int i = 0; i <= classes; ++i) {
    const std::uint64_t count_i = (k * k) >> (3 * i);
    const Value deg = Value{1} << i;
    for (std::uint64_t c = 0; c < count_i; ++c, ++b) {
      for (Value v = 0; v < deg; ++v) {
        out.instance.add(0, {v, b});
        out.instance.add(1, {b, v});
      }
      out.count += static_cast<Frequency>(deg) * deg;
    }
  }
  out.local_sensitivity = static_cast<Frequency>(side);
  out.nominal_domain_size = static_cast<double>(a_size) * b_size * a_size;
  out.description = "gap k=" + std::to_string(k);
  return out;
}

GeneratedInstance gen_bucket_conforming(const std::vector<std::pair<int, Frequency>>& out_vector,
                                        double lambda) {
  if (out_vector.empty() || !(lambda > 0.0)) {
    throw Error(ErrorCode::kInfeasibleVector, "need a non-empty vector and lambda > 0");
  }
  struct Block {
    Frequency degree;
    Frequency values;
  };
  std::vector<Block> blocks;
  std::set<int> seen;
  for (const auto& [bucket, total] : out_vector) {
    if (bucket < 1 || total < 1 || !seen.insert(bucket).second) {
      throw Error(ErrorCode::kInfeasibleVector,
                  "bucket " + std::to_string(bucket) + " with OUT " + std::to_string(total));
    }
    const double lo = std::ldexp(lambda, bucket - 1);
    const double hi = std::ldexp(lambda, bucket);
    Frequency degree = 0;
    for (Frequency d = static_cast<Frequency>(std::floor(hi)); d >= 1 && d > lo; --d) {
      if (total % d == 0) {
        degree = d;
        break;
      }
    }
    if (degree == 0) {
      throw Error(ErrorCode::kInfeasibleVector,
                  "no degree in bucket " + std::to_string(bucket) + " divides " +
                      std::to_string(total));
    }
    blocks.push_back({degree, total / degree});
  }
  Frequency b_total = 0;
  Frequency c_max = 0;
  for (const Block& blk : blocks) {
    b_total += blk.values;
    c_max = std::max(c_max, blk.degree);
  }
  const auto b_size = CheckedDomain(static_cast<std::uint64_t>(b_total), "dom(B)");
  const auto c_size = CheckedDomain(static_cast<std::uint64_t>(c_max), "dom(C)");
  GeneratedInstance out;
  out.instance = Instance(ChainQuery(1, b_size, c_size));
  Value b = 0;
  for (const Block& blk : blocks) {
    for (Frequency v = 0; v < blk.values; ++v, ++b) {
      out.instance.add(0, {0, b});
      for (Value c = 0; c < blk.degree; ++c) out.instance.add(1, {b, c});
    }
    out.count += blk.values * blk.degree;
    out.local_sensitivity = std::max(out.local_sensitivity, blk.degree);
  }
  out.nominal_domain_size = static_cast<double>(b_size) * c_size;
  out.description = "conforming blocks=" + std::to_string(blocks.size());
  return out;
}

LinearQuery lift_two_table_query(const JoinQuery& query, std::span<const double> q) {
  if (query.num_relations() != 2 || q.size() != query.attribute(0).domain_size) {
    throw Error(ErrorCode::kWrongArity, "query does not match the lb2 shape");
  }
  std::vector<std::vector<double>> w(2);
  w[0].resize(query.relation_domain_size(0));
  for (std::uint64_t r = 0; r < w[0].size(); ++r) {
    w[0][r] = q[query.relation_tuple(0, r)[0]];
  }
  w[1].assign(query.relation_domain_size(1), 1.0);
  return LinearQuery(query, std::move(w));
}

LinearQuery lift_multi_table_query(const GeneratedInstance& generated,
                                   const SingleTable& table, std::span<const double> q) {
  const JoinQuery& query = generated.instance.query();
  if (q.size() != table.domain_size()) {
    throw Error(ErrorCode::kWrongArity, "single-table query does not match T");
  }
  const auto owner = SliceOwners(table);
  const std::size_t first = encoding_relation(query);
  std::vector<std::vector<double>> w;
  for (std::size_t i = 0; i < query.num_relations(); ++i) {
    auto& row = w.emplace_back(query.relation_domain_size(i), 1.0);
    if (i != first) continue;
    for (std::uint64_t r = 0; r < row.size(); ++r) {
      row[r] = q[owner.at(query.relation_tuple(i, r)[0])];
    }
  }
  return LinearQuery(query, std::move(w));
}

}  // namespace joinsynth
