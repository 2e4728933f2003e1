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

#include "joinsynth/synthetic.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "joinsynth/error.hpp"

namespace joinsynth {

JoinedDomain::JoinedDomain(JoinQuery query, std::size_t cap)
    : query_(std::move(query)) {
  const double nominal = query_.joined_domain_size();
  if (nominal > static_cast<double>(cap)) {
    throw Error(ErrorCode::kDomainTooLarge,
                "joined domain has " + std::to_string(nominal) +
                    " cells, cap is " + std::to_string(cap));
  }
  size_ = static_cast<std::size_t>(nominal);
  const std::size_t m = query_.num_relations();
  for (std::size_t i = 0; i < m; ++i) {
    if (query_.relation_domain_size(i) > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::kDomainTooLarge, "relation domain exceeds 2^32");
    }
  }
  relation_index_.assign(m * size_, 0);
  const std::size_t k = query_.num_attributes();
  std::vector<Value> digits(k, 0);
  std::vector<std::uint32_t> index(m, 0);
  for (std::size_t cell = 0; cell < size_; ++cell) {
    for (std::size_t i = 0; i < m; ++i) {
      std::uint32_t r = 0;
      for (std::size_t x : query_.schema(i)) {
        r = r * query_.attribute(x).domain_size + digits[x];
      }
      relation_index_[i * size_ + cell] = r;
    }
    for (std::size_t x = k; x-- > 0;) {
      if (++digits[x] < query_.attribute(x).domain_size) break;
      digits[x] = 0;
    }
  }
}

std::size_t JoinedDomain::cell_of(std::span<const Value> full_tuple) const {
  std::size_t cell = 0;
  for (std::size_t x = 0; x < query_.num_attributes(); ++x) {
    cell = cell * query_.attribute(x).domain_size + full_tuple[x];
  }
  return cell;
}

Tuple JoinedDomain::tuple_of(std::size_t cell) const {
  Tuple t(query_.num_attributes());
  for (std::size_t x = t.size(); x-- > 0;) {
    const std::size_t u = query_.attribute(x).domain_size;
    t[x] = static_cast<Value>(cell % u);
    cell /= u;
  }
  return t;
}

SyntheticDistribution::SyntheticDistribution(
    std::shared_ptr<const JoinedDomain> domain)
    : domain_(std::move(domain)), mass_(domain_->size(), 0.0) {}

SyntheticDistribution::SyntheticDistribution(
    std::shared_ptr<const JoinedDomain> domain, std::vector<double> mass)
    : domain_(std::move(domain)), mass_(std::move(mass)) {
  if (mass_.size() != domain_->size()) {
    throw Error(ErrorCode::kInvalidArgument, "mass vector does not match domain");
  }
  for (double v : mass_) {
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "negative or NaN mass");
    }
  }
}

double SyntheticDistribution::total() const {
  double sum = 0.0;
  for (double v : mass_) sum += v;
  return sum;
}

SyntheticDistribution& SyntheticDistribution::operator+=(
    const SyntheticDistribution& other) {
  if (domain_ != other.domain_ && !(domain_->query() == other.domain_->query())) {
    throw Error(ErrorCode::kInvalidArgument, "distributions over different domains");
  }
  for (std::size_t c = 0; c < mass_.size(); ++c) mass_[c] += other.mass_[c];
  return *this;
}

SyntheticDistribution exact_distribution(const JoinTable& join,
                                         std::shared_ptr<const JoinedDomain> domain) {
  if (join.attributes != domain->query().all_attributes()) {
    throw Error(ErrorCode::kInvalidArgument, "join table is not a full join");
  }
  std::vector<double> mass(domain->size(), 0.0);
  for (const auto& [t, f] : join.entries) {
    mass[domain->cell_of(t)] += static_cast<double>(f);
  }
  return SyntheticDistribution(std::move(domain), std::move(mass));
}

void write_synthetic_csv(std::ostream& out, const SyntheticDistribution& f,
                         double sparse_threshold) {
  const JoinQuery& q = f.domain().query();
  for (const auto& a : q.attributes()) out << a.name << ',';
  out << "mass\n";
  char buffer[64];
  for (std::size_t cell = 0; cell < f.domain().size(); ++cell) {
    const double v = f.mass(cell);
    if (v <= 0.0 || v < sparse_threshold) continue;
    for (Value x : f.domain().tuple_of(cell)) out << x << ',';
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    out << buffer << '\n';
  }
}

}  // namespace joinsynth
