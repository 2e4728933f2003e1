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

#include "joinsynth/hierarchical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "joinsynth/error.hpp"
#include "joinsynth/sensitivity.hpp"

namespace joinsynth {

namespace {

void RequireHierarchical(const JoinQuery& query) {
  if (!is_hierarchical(query)) {
    throw Error(ErrorCode::kNotHierarchical, "query is not hierarchical");
  }
}

std::string CompactNames(const JoinQuery& query, AttributeSet set) {
  std::string out;
  for (std::size_t x : Members(set)) out += query.attribute(x).name;
  return out;
}

std::string RelationDigits(RelationSet relations) {
  std::string out;
  for (std::size_t i : Members(relations)) out += std::to_string(i + 1);
  return out;
}

// FNV-1a over the rendered configuration; used as an RNG stream id.
std::uint64_t ConfigurationHash(const std::vector<std::pair<std::string, int>>& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& [name, bucket] : config) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix(0);
    for (char c : std::to_string(bucket)) mix(static_cast<unsigned char>(c));
    mix(0xff);
  }
  return h;
}

}  // namespace

bool is_hierarchical(const JoinQuery& query) {
  const std::size_t k = query.num_attributes();
  for (std::size_t x = 0; x < k; ++x) {
    for (std::size_t y = x + 1; y < k; ++y) {
      const RelationSet a = query.atom(x);
      const RelationSet b = query.atom(y);
      const RelationSet both = a & b;
      if (both != 0 && both != a && both != b) return false;
    }
  }
  return true;
}

AttributeForest::AttributeForest(const JoinQuery& query) {
  RequireHierarchical(query);
  const std::size_t k = query.num_attributes();
  node_of_.assign(k, 0);
  std::map<RelationSet, std::size_t> by_atom;
  for (std::size_t x = 0; x < k; ++x) {
    const RelationSet atom = query.atom(x);
    auto it = by_atom.find(atom);
    if (it == by_atom.end()) {
      it = by_atom.emplace(atom, nodes_.size()).first;
      nodes_.push_back(Node{});
      nodes_.back().atom = atom;
    }
    Node& node = nodes_[it->second];
    node.attributes |= AttributeSet{1} << x;
    node_of_[x] = it->second;
  }
  for (Node& node : nodes_) {
    std::vector<std::string> names;
    for (std::size_t x : Members(node.attributes)) names.push_back(query.attribute(x).name);
    for (std::size_t p = 0; p < names.size(); ++p) {
      node.name += (p == 0 ? "" : "+") + names[p];
    }
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    Node& node = nodes_[id];
    int best = -1;
    for (std::size_t other = 0; other < nodes_.size(); ++other) {
      const RelationSet atom = nodes_[other].atom;
      if (other == id || (atom & node.atom) != node.atom || atom == node.atom) continue;
      node.ancestors |= nodes_[other].attributes;
      if (best < 0 || std::popcount(atom) <
                          std::popcount(nodes_[static_cast<std::size_t>(best)].atom)) {
        best = static_cast<int>(other);
      }
    }
    node.parent = best;
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].parent >= 0) {
      nodes_[static_cast<std::size_t>(nodes_[id].parent)].children.push_back(id);
    }
    int depth = 0;
    for (int p = nodes_[id].parent; p >= 0; p = nodes_[static_cast<std::size_t>(p)].parent) {
      ++depth;
    }
    nodes_[id].depth = depth;
  }
  for (Node& node : nodes_) {
    std::sort(node.children.begin(), node.children.end(),
              [this](std::size_t a, std::size_t b) { return nodes_[a].name < nodes_[b].name; });
  }
  // Each relation must be the attribute set of one root-to-node path.
  for (std::size_t i = 0; i < query.num_relations(); ++i) {
    int deepest = -1;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      if ((nodes_[id].atom & Singleton(i)) &&
          (deepest < 0 || nodes_[id].depth > nodes_[static_cast<std::size_t>(deepest)].depth)) {
        deepest = static_cast<int>(id);
      }
    }
    AttributeSet path = 0;
    for (int p = deepest; p >= 0; p = nodes_[static_cast<std::size_t>(p)].parent) {
      path |= nodes_[static_cast<std::size_t>(p)].attributes;
    }
    if (path != query.schema_set(i)) {
      throw Error(ErrorCode::kNotHierarchical,
                  "relation " + std::to_string(i + 1) + " is not a root-to-node path");
    }
  }
}

std::vector<std::size_t> AttributeForest::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].parent < 0) out.push_back(id);
  }
  std::sort(out.begin(), out.end(),
            [this](std::size_t a, std::size_t b) { return nodes_[a].name < nodes_[b].name; });
  return out;
}

std::optional<std::size_t> AttributeForest::find(RelationSet atom,
                                                 AttributeSet ancestors) const {
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].atom == atom && nodes_[id].ancestors == ancestors) return id;
  }
  return std::nullopt;
}

std::vector<std::size_t> AttributeForest::visit_order() const {
  std::vector<std::size_t> order(nodes_.size());
  for (std::size_t id = 0; id < order.size(); ++id) order[id] = id;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    if (nodes_[a].depth != nodes_[b].depth) return nodes_[a].depth > nodes_[b].depth;
    return nodes_[a].name < nodes_[b].name;
  });
  return order;
}

std::string AttributeForest::render() const {
  std::ostringstream out;
  auto emit = [&](auto&& self, std::size_t id) -> void {
    const Node& node = nodes_[id];
    out << std::string(2 * static_cast<std::size_t>(node.depth), ' ') << node.name
        << " atom={" << RelationDigits(node.atom) << "}\n";
    for (std::size_t child : node.children) self(self, child);
  };
  for (std::size_t root : roots()) emit(emit, root);
  return out.str();
}

AttributeForest attribute_forest(const JoinQuery& query) { return AttributeForest(query); }

std::map<Tuple, Frequency> hdegree_map(const Instance& instance, RelationSet relations,
                                       AttributeSet y) {
  const JoinQuery& q = instance.query();
  if (relations == 0 || (relations & ~q.all_relations()) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "bad relation set");
  }
  const AttributeSet wedge = q.intersection_of(relations);
  if ((y & ~wedge) != 0) {
    throw Error(ErrorCode::kAttributeNotInSchema,
                "{" + q.attribute_names(y & ~wedge) + "} not shared by all of E");
  }
  if (std::popcount(relations) == 1) {
    return degree_map(instance, static_cast<std::size_t>(std::countr_zero(relations)), y);
  }
  std::set<Tuple> psi;
  VisitJoin(instance, relations, [&](std::span<const Value> a, Frequency) {
    psi.insert(ProjectAssignment(a, wedge));
  });
  std::map<Tuple, Frequency> out;
  for (const Tuple& t : psi) ++out[Project(t, wedge, y)];
  return out;
}

Frequency hdegree(const Instance& instance, RelationSet relations, AttributeSet y,
                  const Tuple& value) {
  const auto map = hdegree_map(instance, relations, y);
  const auto it = map.find(value);
  return it == map.end() ? 0 : it->second;
}

Frequency max_hdegree(const Instance& instance, RelationSet relations, AttributeSet y) {
  Frequency best = 0;
  for (const auto& [t, d] : hdegree_map(instance, relations, y)) best = std::max(best, d);
  return best;
}

std::vector<std::pair<std::string, int>> describe_configuration(
    const AttributeForest& forest, const DegreeConfiguration& sigma) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& [id, bucket] : sigma) out.emplace_back(forest.node(id).name, bucket);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<DecomposedPart> decompose(const Instance& instance,
                                      const AttributeForest& forest, std::size_t node,
                                      const PrivacyParams& params, RngStream& rng,
                                      std::optional<double> bucket_lambda) {
  const JoinQuery& q = instance.query();
  const auto& x = forest.node(node);
  const RelationSet e = x.atom;
  const AttributeSet y = x.ancestors;
  const double eps = params.epsilon();
  const double lambda = bucket_lambda.value_or(params.lambda());
  const double shift = tau(eps, params.delta(), 1.0);

  std::map<Tuple, int> bucket_of;
  for (const auto& [t, d] : hdegree_map(instance, e, y)) {
    if (d <= 0) continue;
    const double noisy = static_cast<double>(d) + sample_tlap(1.0 / eps, shift, rng);
    bucket_of[t] = bucket_index(noisy, lambda);
  }

  std::map<int, Instance> by_bucket;
  std::set<int> buckets;
  for (const auto& [t, b] : bucket_of) buckets.insert(b);
  for (int b : buckets) by_bucket.emplace(b, Instance(q));
  for (std::size_t j = 0; j < q.num_relations(); ++j) {
    for (const auto& [t, f] : instance.relation(j).support()) {
      if (e & Singleton(j)) {
        // Tuples whose y-value has no positive degree join nothing.
        const auto it = bucket_of.find(Project(t, q.schema_set(j), y));
        if (it != bucket_of.end()) by_bucket.at(it->second).add(j, t, f);
      } else {
        for (auto& [b, sub] : by_bucket) sub.add(j, t, f);
      }
    }
  }
  std::vector<DecomposedPart> out;
  for (auto& [b, sub] : by_bucket) out.push_back({std::move(sub), b});
  return out;
}

std::size_t max_tuple_multiplicity(const Instance& instance,
                                   const std::vector<HierarchicalPart>& parts) {
  std::size_t best = 0;
  for (std::size_t j = 0; j < instance.num_relations(); ++j) {
    std::map<Tuple, std::size_t> seen;
    for (const auto& part : parts) {
      for (const auto& [t, f] : part.instance.relation(j).support()) ++seen[t];
    }
    for (const auto& [t, n] : seen) best = std::max(best, n);
  }
  return best;
}

HierarchicalPartition partition_hierarchical(const Instance& instance,
                                             const PrivacyParams& params, RngStream& rng,
                                             std::optional<double> bucket_lambda) {
  const JoinQuery& q = instance.query();
  const AttributeForest forest(q);
  HierarchicalPartition result;
  std::vector<HierarchicalPart> current;
  current.push_back({instance, {}});
  for (std::size_t node : forest.visit_order()) {
    std::vector<HierarchicalPart> next;
    for (const auto& part : current) {
      for (auto& piece : decompose(part.instance, forest, node, params, rng, bucket_lambda)) {
        DegreeConfiguration sigma = part.configuration;
        sigma[node] = piece.bucket;
        next.push_back({std::move(piece.instance), std::move(sigma)});
      }
    }
    current = std::move(next);
  }
  result.parts = std::move(current);
  result.max_multiplicity = max_tuple_multiplicity(instance, result.parts);

  const double lambda = bucket_lambda.value_or(params.lambda());
  const double n = static_cast<double>(instance.input_size());
  result.ell = static_cast<int>(std::ceil(std::log2(n / lambda + 1.0)));
  for (std::size_t x = 0; x < q.num_attributes(); ++x) result.c += std::popcount(q.atom(x));
  result.multiplicity_bound = std::pow(static_cast<double>(result.ell), result.c);
  return result;
}

std::string render_term(const JoinQuery& query, const BoundTerm& term) {
  return "mdeg_" + RelationDigits(term.relations) + "(" + CompactNames(query, term.y) + ")";
}

std::string SymbolicBound::render(const JoinQuery& query) const {
  std::string out;
  for (std::size_t p = 0; p < terms.size(); ++p) {
    if (p > 0) out += " * ";
    out += render_term(query, terms[p]);
  }
  return out.empty() ? "1" : out;
}

namespace {

void BoundRecurse(const JoinQuery& q, RelationSet e, AttributeSet y,
                  std::vector<BoundTerm>& out) {
  if (std::popcount(e) == 1) {
    out.push_back({e, y});
    return;
  }
  const auto parts = q.components(e, y);
  if (parts.size() > 1) {
    for (RelationSet c : parts) BoundRecurse(q, c, y & q.union_of(c), out);
    return;
  }
  const AttributeSet wedge = q.intersection_of(e);
  if ((y & ~wedge) != 0 || y == wedge) {
    throw Error(ErrorCode::kNotHierarchical,
                "degree recursion did not shrink for E={" + RelationDigits(e) + "}");
  }
  out.push_back({e, y});
  BoundRecurse(q, e, wedge, out);
}

}  // namespace

SymbolicBound symbolic_T_bound(const JoinQuery& query, RelationSet relations) {
  RequireHierarchical(query);
  if (relations == 0 || (relations & ~query.all_relations()) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "E must be a non-empty set of relations");
  }
  SymbolicBound bound;
  BoundRecurse(query, relations, query.boundary(relations), bound.terms);
  std::sort(bound.terms.begin(), bound.terms.end());
  return bound;
}

double evaluate_T_bound(const Instance& instance, const SymbolicBound& bound) {
  double product = 1.0;
  for (const BoundTerm& term : bound.terms) {
    product *= static_cast<double>(max_hdegree(instance, term.relations, term.y));
  }
  return product;
}

double rs_under_config(const JoinQuery& query, const DegreeConfiguration& sigma,
                       double beta, double lambda) {
  const AttributeForest forest(query);
  const std::size_t m = query.num_relations();
  const RelationSet all = query.all_relations();
  std::vector<double> t(std::size_t{1} << m, 0.0);
  t[0] = 1.0;
  for (RelationSet e = 1; e < all; ++e) {
    double product = 1.0;
    for (const BoundTerm& term : symbolic_T_bound(query, e).terms) {
      const auto node = forest.find(term.relations, term.y);
      if (!node) {
        throw Error(ErrorCode::kConfigDomainMismatch,
                    render_term(query, term) + " matches no attribute node");
      }
      const auto it = sigma.find(*node);
      if (it == sigma.end()) {
        throw Error(ErrorCode::kConfigDomainMismatch,
                    "configuration has no bucket for node " + forest.node(*node).name);
      }
      product *= std::ldexp(lambda, it->second);
    }
    t[e] = product;
  }
  return residual_from_boundary_values(m, t, beta).value;
}

DegreeConfiguration true_configuration(const Instance& instance, double lambda) {
  const AttributeForest forest(instance.query());
  DegreeConfiguration sigma;
  for (std::size_t id = 0; id < forest.nodes().size(); ++id) {
    const auto& node = forest.node(id);
    sigma[id] = bucket_index(
        static_cast<double>(max_hdegree(instance, node.atom, node.ancestors)), lambda);
  }
  return sigma;
}

ReleaseReport release_uniformized_hierarchical(const Instance& instance,
                                               const FamilyEvaluator& evaluator,
                                               const PrivacyParams& params,
                                               RngStream& rng,
                                               const ReleaseOptions& options) {
  const JoinQuery& q = instance.query();
  RequireHierarchical(q);
  const AttributeForest forest(q);
  const PrivacyParams half = params.scaled(0.5);
  ReleaseReport report;
  report.pipeline = "unif_hierarchical";
  report.epsilon = params.epsilon();
  report.delta = params.delta();
  report.synthetic = SyntheticDistribution(evaluator.shared_domain());

  const HierarchicalPartition partition =
      partition_hierarchical(instance, half, rng, params.lambda());
  report.max_multiplicity = partition.max_multiplicity;
  for (const HierarchicalPart& part : partition.parts) {
    const auto config = describe_configuration(forest, part.configuration);
    RngStream sub_rng = rng.child(ConfigurationHash(config));
    ReleaseReport sub = release_multi_table(part.instance, evaluator, half, sub_rng, options);
    sub.configuration = config;
    report.synthetic += sub.synthetic;
    report.sensitivity = std::max(report.sensitivity, sub.sensitivity);
    report.delta_tilde_used = std::max(report.delta_tilde_used, sub.delta_tilde_used);
    report.iterations += sub.iterations;
    report.n_hat += sub.n_hat;
    report.clipped += sub.clipped;
    report.beta = sub.beta;
    report.sub_reports.push_back(std::move(sub));
  }
  // A tuple is read by one decompose per node on its relation's path, and by
  // every sub-release that holds a copy of it.
  std::size_t longest = 0;
  for (std::size_t i = 0; i < q.num_relations(); ++i) {
    longest = std::max(longest, q.schema(i).size());
  }
  const double c_prime = static_cast<double>(longest);
  const double multiplicity = static_cast<double>(partition.max_multiplicity);
  report.epsilon_spent = half.epsilon() * c_prime + half.epsilon() * multiplicity;
  report.delta_spent = half.delta() * c_prime + half.delta() * multiplicity;
  return report;
}

ReleaseReport release_uniformized_hierarchical(const Instance& instance,
                                               const QueryFamily& family,
                                               const PrivacyParams& params,
                                               RngStream& rng,
                                               const ReleaseOptions& options) {
  RequireHierarchical(instance.query());
  FamilyEvaluator evaluator(
      std::make_shared<const JoinedDomain>(instance.query(), options.cap), family);
  return release_uniformized_hierarchical(instance, evaluator, params, rng, options);
}

}  // namespace joinsynth
