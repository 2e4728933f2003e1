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

#include "test_support.hpp"

#include <algorithm>
#include <cmath>

#include "joinsynth/noise.hpp"

namespace testing_support {

using joinsynth::Attribute;

Instance TwoByTwo() {
  Instance inst(ChainQuery(3, 2, 2));
  inst.add(0, {1, 0});
  inst.add(0, {2, 0});
  inst.add(1, {0, 0});
  inst.add(1, {0, 1});
  return inst;
}

JoinQuery ChainQuery(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  return JoinQuery({{"A", a}, {"B", b}, {"C", c}},
                   std::vector<std::vector<std::string>>{{"A", "B"}, {"B", "C"}});
}

JoinQuery FigureQuery(std::uint32_t dom) {
  std::vector<Attribute> attrs;
  for (const char* name : {"A", "B", "C", "D", "F", "G", "K", "L"}) {
    attrs.push_back({name, dom});
  }
  return JoinQuery(attrs, std::vector<std::vector<std::string>>{{"A", "B", "D"},
                                                                {"A", "B", "F"},
                                                                {"A", "B", "G", "K"},
                                                                {"A", "B", "G", "L"},
                                                                {"A", "C"}});
}

JoinQuery PathThreeQuery(std::uint32_t dom) {
  return JoinQuery({{"A", dom}, {"B", dom}, {"C", dom}, {"D", dom}},
                   std::vector<std::vector<std::string>>{{"A", "B"}, {"B", "C"}, {"C", "D"}});
}

JoinQuery RandomQuery(std::mt19937_64& gen, const RandomShape& shape) {
  std::uniform_int_distribution<int> num_attr(1, shape.max_attributes);
  std::uniform_int_distribution<int> num_rel(1, shape.max_relations);
  std::uniform_int_distribution<std::uint32_t> dom(1, shape.max_domain);
  const int n = num_attr(gen);
  const int m = num_rel(gen);
  std::vector<Attribute> attrs;
  for (int x = 0; x < n; ++x) attrs.push_back({std::string(1, char('A' + x)), dom(gen)});
  std::vector<std::vector<std::size_t>> rels(static_cast<std::size_t>(m));
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> pick_rel(0, m - 1);
  std::uniform_int_distribution<int> pick_attr(0, n - 1);
  for (auto& r : rels) {
    for (int x = 0; x < n; ++x) {
      if (coin(gen)) r.push_back(static_cast<std::size_t>(x));
    }
    if (r.empty()) r.push_back(static_cast<std::size_t>(pick_attr(gen)));
  }
  for (int x = 0; x < n; ++x) {
    const bool covered = std::any_of(rels.begin(), rels.end(), [&](const auto& r) {
      return std::find(r.begin(), r.end(), static_cast<std::size_t>(x)) != r.end();
    });
    if (!covered) {
      auto& r = rels[static_cast<std::size_t>(pick_rel(gen))];
      r.push_back(static_cast<std::size_t>(x));
      std::sort(r.begin(), r.end());
    }
  }
  return JoinQuery(attrs, rels);
}

Instance RandomInstance(std::mt19937_64& gen, const JoinQuery& query,
                        const RandomShape& shape) {
  Instance inst(query);
  std::bernoulli_distribution present(shape.density);
  std::uniform_int_distribution<Frequency> freq(1, shape.max_frequency);
  for (std::size_t i = 0; i < query.num_relations(); ++i) {
    const std::uint64_t size = query.relation_domain_size(i);
    for (std::uint64_t idx = 0; idx < size; ++idx) {
      if (present(gen)) inst.add(i, query.relation_tuple(i, idx), freq(gen));
    }
  }
  return inst;
}

Instance RandomTwoTable(std::mt19937_64& gen, std::uint32_t max_domain,
                        Frequency max_frequency) {
  std::uniform_int_distribution<std::uint32_t> dom(1, max_domain);
  RandomShape shape;
  shape.max_frequency = max_frequency;
  std::uniform_real_distribution<double> density(0.1, 0.9);
  shape.density = density(gen);
  return RandomInstance(gen, ChainQuery(dom(gen), dom(gen), dom(gen)), shape);
}

Instance RandomFigureInstance(std::mt19937_64& gen, std::uint32_t dom, double density,
                              Frequency max_frequency) {
  RandomShape shape;
  shape.density = density;
  shape.max_frequency = max_frequency;
  return RandomInstance(gen, FigureQuery(dom), shape);
}

void ForEachAssignment(const JoinQuery& query, AttributeSet attrs,
                       const std::function<void(const std::vector<Value>&)>& visit) {
  std::vector<std::size_t> members;
  for (std::size_t x = 0; x < query.num_attributes(); ++x) {
    if ((attrs >> x) & 1U) members.push_back(x);
  }
  std::vector<Value> a(query.num_attributes(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == members.size()) {
      visit(a);
      return;
    }
    const std::size_t x = members[depth];
    for (Value v = 0; v < query.attribute(x).domain_size; ++v) {
      a[x] = v;
      rec(depth + 1);
    }
    a[x] = 0;
  };
  rec(0);
}

namespace {

Frequency ProductOver(const Instance& instance, RelationSet relations,
                      const std::vector<Value>& a) {
  const JoinQuery& q = instance.query();
  Frequency product = 1;
  for (std::size_t i = 0; i < q.num_relations(); ++i) {
    if (((relations >> i) & 1U) == 0) continue;
    Tuple t;
    for (std::size_t x : q.schema(i)) t.push_back(a[x]);
    product *= instance.relation(i).frequency(t);
    if (product == 0) return 0;
  }
  return product;
}

Tuple Restrict(const std::vector<Value>& a, AttributeSet attrs) {
  Tuple t;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if ((attrs >> x) & 1U) t.push_back(a[x]);
  }
  return t;
}

}  // namespace

std::map<Tuple, Frequency> BruteJoin(const Instance& instance) {
  const JoinQuery& q = instance.query();
  std::map<Tuple, Frequency> out;
  ForEachAssignment(q, q.all_attributes(), [&](const std::vector<Value>& a) {
    const Frequency f = ProductOver(instance, q.all_relations(), a);
    if (f > 0) out[a] = f;
  });
  return out;
}

Frequency BruteCount(const Instance& instance) {
  Frequency total = 0;
  for (const auto& [t, f] : BruteJoin(instance)) total += f;
  return total;
}

Frequency BruteBoundary(const Instance& instance, RelationSet relations) {
  if (relations == 0) return 1;
  const JoinQuery& q = instance.query();
  AttributeSet inside = 0;
  AttributeSet outside = 0;
  for (std::size_t i = 0; i < q.num_relations(); ++i) {
    if ((relations >> i) & 1U) {
      inside |= q.schema_set(i);
    } else {
      outside |= q.schema_set(i);
    }
  }
  const AttributeSet boundary = inside & outside;
  std::map<Tuple, Frequency> groups;
  ForEachAssignment(q, inside, [&](const std::vector<Value>& a) {
    const Frequency f = ProductOver(instance, relations, a);
    if (f > 0) groups[Restrict(a, boundary)] += f;
  });
  Frequency best = 0;
  for (const auto& [t, f] : groups) best = std::max(best, f);
  return best;
}

double BruteEval(const joinsynth::LinearQuery& q, const Instance& instance) {
  const JoinQuery& query = instance.query();
  double total = 0.0;
  ForEachAssignment(query, query.all_attributes(), [&](const std::vector<Value>& a) {
    const Frequency f = ProductOver(instance, query.all_relations(), a);
    if (f == 0) return;
    double w = static_cast<double>(f);
    for (std::size_t i = 0; i < query.num_relations(); ++i) {
      Tuple t;
      for (std::size_t x : query.schema(i)) t.push_back(a[x]);
      w *= q.weight(query, i, t);
    }
    total += w;
  });
  return total;
}

Frequency BruteDegree(const Instance& instance, std::size_t i, AttributeSet y,
                      const Tuple& t) {
  const JoinQuery& q = instance.query();
  Frequency total = 0;
  for (const auto& [tuple, f] : instance.relation(i).support()) {
    Tuple proj;
    std::size_t pos = 0;
    for (std::size_t x : q.schema(i)) {
      if ((y >> x) & 1U) proj.push_back(tuple[pos]);
      ++pos;
    }
    if (proj == t) total += f;
  }
  return total;
}

std::map<Tuple, Frequency> AddJoins(const std::map<Tuple, Frequency>& a,
                                    const std::map<Tuple, Frequency>& b) {
  std::map<Tuple, Frequency> out = a;
  for (const auto& [t, f] : b) out[t] += f;
  return out;
}

JoinQuery RandomHierarchicalQuery(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n_attr(2, 5);
  const int n = n_attr(gen);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (int x = 1; x < n; ++x) {
    std::uniform_int_distribution<int> p(-1, x - 1);
    parent[static_cast<std::size_t>(x)] = p(gen);
  }
  std::vector<joinsynth::Attribute> attrs;
  std::uniform_int_distribution<std::uint32_t> dom(1, 3);
  for (int x = 0; x < n; ++x) attrs.push_back({std::string(1, char('A' + x)), dom(gen)});
  // one relation per leaf, plus occasionally one per inner node
  std::vector<bool> has_child(static_cast<std::size_t>(n), false);
  for (int x = 0; x < n; ++x) {
    if (parent[static_cast<std::size_t>(x)] >= 0) {
      has_child[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])] = true;
    }
  }
  std::bernoulli_distribution extra(0.3);
  std::vector<std::vector<std::size_t>> rels;
  for (int x = 0; x < n; ++x) {
    if (has_child[static_cast<std::size_t>(x)] && !extra(gen)) continue;
    std::vector<std::size_t> path;
    for (int y = x; y >= 0; y = parent[static_cast<std::size_t>(y)]) {
      path.push_back(static_cast<std::size_t>(y));
    }
    std::sort(path.begin(), path.end());
    rels.push_back(path);
  }
  return joinsynth::JoinQuery(attrs, rels);
}

double TlapDominanceExcess(double epsilon, double delta, double sensitivity,
                           int draws, std::uint64_t seed, int bins) {
  const double shift = joinsynth::tau(epsilon, delta, sensitivity);
  const double scale = sensitivity / epsilon;
  const double hi = 2.0 * shift + sensitivity;
  auto histogram = [&](double offset, std::uint64_t stream) {
    joinsynth::RngStream rng(seed, stream);
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (int d = 0; d < draws; ++d) {
      const double x = offset + joinsynth::sample_tlap(scale, shift, rng);
      auto b = static_cast<std::size_t>(x / hi * bins);
      h[std::min(b, h.size() - 1)] += 1.0 / draws;
    }
    return h;
  };
  const std::vector<double> p0 = histogram(0.0, 1);
  const std::vector<double> p1 = histogram(sensitivity, 2);
  const double e = std::exp(epsilon);
  double worst = -1.0;
  auto check = [&](double p, double q) {
    const double sigma = std::sqrt(p * (1 - p) / draws + e * e * q * (1 - q) / draws);
    worst = std::max(worst, p - e * q - delta - 3.0 * sigma);
  };
  const std::size_t n = p0.size();
  for (std::size_t lo = 0; lo < n; ++lo) {
    check(p0[lo], p1[lo]);
    check(p1[lo], p0[lo]);
  }
  double a0 = 0, a1 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    a0 += p0[k];
    a1 += p1[k];
    check(a0, a1);
    check(a1, a0);
    check(1 - a0, 1 - a1);
    check(1 - a1, 1 - a0);
  }
  return worst;
}

}  // namespace testing_support
