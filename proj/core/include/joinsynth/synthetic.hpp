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

#ifndef JOINSYNTH_SYNTHETIC_HPP_
#define JOINSYNTH_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "joinsynth/relational.hpp"

namespace joinsynth {

// Dense enumeration of the full joined domain prod_x dom(x). Cells are
// row-major over attributes (last attribute fastest). For every cell the
// dense index into each relation's domain is precomputed so factored queries
// can be evaluated with m table lookups per cell.
class JoinedDomain {
 public:
  explicit JoinedDomain(JoinQuery query, std::size_t cap = kDefaultSupportCap);

  const JoinQuery& query() const { return query_; }
  std::size_t size() const { return size_; }
  std::uint32_t relation_index(std::size_t relation, std::size_t cell) const {
    return relation_index_[relation * size_ + cell];
  }
  std::span<const std::uint32_t> relation_indices(std::size_t relation) const {
    return {relation_index_.data() + relation * size_, size_};
  }
  std::size_t cell_of(std::span<const Value> full_tuple) const;
  Tuple tuple_of(std::size_t cell) const;

 private:
  JoinQuery query_;
  std::size_t size_ = 0;
  std::vector<std::uint32_t> relation_index_;
};

// Non-negative mass over the joined domain: the released artifact.
class SyntheticDistribution {
 public:
  SyntheticDistribution() = default;
  explicit SyntheticDistribution(std::shared_ptr<const JoinedDomain> domain);
  SyntheticDistribution(std::shared_ptr<const JoinedDomain> domain,
                        std::vector<double> mass);

  const JoinedDomain& domain() const { return *domain_; }
  const std::shared_ptr<const JoinedDomain>& shared_domain() const { return domain_; }
  const JoinedDomain* domain_ptr() const { return domain_.get(); }
  std::span<const double> mass() const { return mass_; }
  double mass(std::size_t cell) const { return mass_[cell]; }
  double total() const;

  // Pointwise sum; both operands must share the same joined domain.
  SyntheticDistribution& operator+=(const SyntheticDistribution& other);

 private:
  std::shared_ptr<const JoinedDomain> domain_;
  std::vector<double> mass_;
};

// F = Join^I exactly, for oracles and tests.
SyntheticDistribution exact_distribution(const JoinTable& join,
                                         std::shared_ptr<const JoinedDomain> domain);

// Header of attribute names plus "mass"; one row per cell whose mass exceeds
// `sparse_threshold` (cells with zero mass are always dropped).
void write_synthetic_csv(std::ostream& out, const SyntheticDistribution& f,
                         double sparse_threshold = 0.0);

}  // namespace joinsynth

#endif  // JOINSYNTH_SYNTHETIC_HPP_
