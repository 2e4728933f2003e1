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

#ifndef JOINSYNTH_HIERARCHICAL_HPP_
#define JOINSYNTH_HIERARCHICAL_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "joinsynth/noise.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/relational.hpp"
#include "joinsynth/release.hpp"

namespace joinsynth {

bool is_hierarchical(const JoinQuery& query);

// Attribute tree (or forest) of a hierarchical query. Attributes with equal
// atom sets share one node; a node's parent is the node with the smallest
// strictly larger atom set.
class AttributeForest {
 public:
  struct Node {
    std::string name;
    AttributeSet attributes = 0;
    RelationSet atom = 0;
    // All attributes y with atom(x) strictly inside atom(y).
    AttributeSet ancestors = 0;
    int parent = -1;
    std::vector<std::size_t> children;
    int depth = 0;
  };

  explicit AttributeForest(const JoinQuery& query);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t node_of(std::size_t attribute) const { return node_of_.at(attribute); }
  std::vector<std::size_t> roots() const;
  // Node whose (atom, ancestors) pair is (atom, ancestors), if any.
  std::optional<std::size_t> find(RelationSet atom, AttributeSet ancestors) const;
  // Deepest-first, ties by name.
  std::vector<std::size_t> visit_order() const;
  std::string render() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::size_t> node_of_;
};

AttributeForest attribute_forest(const JoinQuery& query);

// deg_{E,y}(t): summed frequency when |E| = 1, otherwise the number of distinct
// projections onto the common attributes of E of joinable E-tuples.
Frequency hdegree(const Instance& instance, RelationSet relations, AttributeSet y,
                  const Tuple& value);
std::map<Tuple, Frequency> hdegree_map(const Instance& instance, RelationSet relations,
                                       AttributeSet y);
Frequency max_hdegree(const Instance& instance, RelationSet relations, AttributeSet y);

// Forest node id -> bucket.
using DegreeConfiguration = std::map<std::size_t, int>;

std::vector<std::pair<std::string, int>> describe_configuration(
    const AttributeForest& forest, const DegreeConfiguration& sigma);

struct DecomposedPart {
  Instance instance;
  int bucket = 1;
};

std::vector<DecomposedPart> decompose(const Instance& instance,
                                      const AttributeForest& forest, std::size_t node,
                                      const PrivacyParams& params, RngStream& rng,
                                      std::optional<double> bucket_lambda = std::nullopt);

struct HierarchicalPart {
  Instance instance;
  DegreeConfiguration configuration;
};

struct HierarchicalPartition {
  std::vector<HierarchicalPart> parts;
  std::size_t max_multiplicity = 0;
  // l^c with l = ceil(log2(n / lambda + 1)) and c = sum_x |atom(x)|.
  int ell = 0;
  int c = 0;
  double multiplicity_bound = 0.0;
};

HierarchicalPartition partition_hierarchical(
    const Instance& instance, const PrivacyParams& params, RngStream& rng,
    std::optional<double> bucket_lambda = std::nullopt);

// Largest number of parts holding any one input tuple.
std::size_t max_tuple_multiplicity(const Instance& instance,
                                   const std::vector<HierarchicalPart>& parts);

// One factor mdeg_E(y) of an upper bound on T_E.
struct BoundTerm {
  RelationSet relations = 0;
  AttributeSet y = 0;

  auto operator<=>(const BoundTerm&) const = default;
};

struct SymbolicBound {
  std::vector<BoundTerm> terms;

  // e.g. "mdeg_5(A) * mdeg_34(AB)"; relation numbers are 1-based.
  std::string render(const JoinQuery& query) const;
};

std::string render_term(const JoinQuery& query, const BoundTerm& term);

SymbolicBound symbolic_T_bound(const JoinQuery& query, RelationSet relations);
double evaluate_T_bound(const Instance& instance, const SymbolicBound& bound);

// Residual sensitivity with every T_E replaced by its degree bound where each
// mdeg term becomes lambda * 2^sigma(node).
double rs_under_config(const JoinQuery& query, const DegreeConfiguration& sigma,
                       double beta, double lambda);

// sigma(x) = bucket of the true maximum degree at every node.
DegreeConfiguration true_configuration(const Instance& instance, double lambda);

ReleaseReport release_uniformized_hierarchical(const Instance& instance,
                                               const FamilyEvaluator& evaluator,
                                               const PrivacyParams& params,
                                               RngStream& rng,
                                               const ReleaseOptions& options = {});
ReleaseReport release_uniformized_hierarchical(const Instance& instance,
                                               const QueryFamily& family,
                                               const PrivacyParams& params,
                                               RngStream& rng,
                                               const ReleaseOptions& options = {});

}  // namespace joinsynth

#endif  // JOINSYNTH_HIERARCHICAL_HPP_
