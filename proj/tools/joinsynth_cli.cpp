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

// joinsynth: generate, verify and privately release join instances.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "joinsynth/error.hpp"
#include "joinsynth/experiment.hpp"
#include "joinsynth/generators.hpp"
#include "joinsynth/hierarchical.hpp"
#include "joinsynth/instance_io.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/release.hpp"
#include "joinsynth/sensitivity.hpp"
#include "joinsynth/synthetic.hpp"
#include "json.hpp"

namespace js = joinsynth;
using nlohmann::json;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;
constexpr int kExitArity = 4;
constexpr int kExitHierarchy = 5;
constexpr int kExitParse = 6;

int ExitCodeFor(js::ErrorCode code) {
  switch (code) {
    case js::ErrorCode::kSupportTooLarge:
    case js::ErrorCode::kDomainTooLarge:
      return kExitCap;
    case js::ErrorCode::kWrongArity:
    case js::ErrorCode::kSchemaNotTwoTableChain:
      return kExitArity;
    case js::ErrorCode::kNotHierarchical:
      return kExitHierarchy;
    case js::ErrorCode::kParseError:
      return kExitParse;
    default:
      return kExitOther;
  }
}

// Defaults from the file named by JOINSYNTH_CONFIG; flags override them.
json LoadDefaults() {
  const char* path = std::getenv("JOINSYNTH_CONFIG");
  if (path == nullptr || *path == '\0') return json::object();
  std::ifstream in(path);
  if (!in) throw js::Error(js::ErrorCode::kInvalidArgument, std::string("cannot open ") + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw js::Error(js::ErrorCode::kParseError, std::string(path) + ": " + e.what());
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw js::Error(js::ErrorCode::kInvalidArgument, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw js::Error(js::ErrorCode::kInvalidArgument, "cannot write " + path.string());
  }
  out << text;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const std::uint64_t lo = std::stoull(item.substr(0, dash));
      const std::uint64_t hi = std::stoull(item.substr(dash + 1));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(std::stoull(item));
    }
  }
  if (seeds.empty()) throw js::Error(js::ErrorCode::kInvalidArgument, "no seeds given");
  return seeds;
}

// Spreads n units over d values as evenly as possible.
js::SingleTable EvenTable(std::uint32_t d, js::Frequency n) {
  js::SingleTable table;
  table.frequency.assign(d, n / d);
  for (js::Frequency r = 0; r < n % d; ++r) ++table.frequency[static_cast<std::size_t>(r)];
  return table;
}

// "A,B;B,C" -> query with the given schemas; every attribute gets domain 1
// (the generator assigns real domains).
js::JoinQuery SchemaQuery(const std::string& text) {
  std::vector<std::vector<std::string>> relations;
  std::vector<js::Attribute> attributes;
  std::stringstream rels(text);
  std::string rel;
  while (std::getline(rels, rel, ';')) {
    auto& names = relations.emplace_back();
    std::stringstream attrs(rel);
    std::string name;
    while (std::getline(attrs, name, ',')) {
      if (name.empty()) continue;
      names.push_back(name);
      if (std::none_of(attributes.begin(), attributes.end(),
                       [&](const js::Attribute& a) { return a.name == name; })) {
        attributes.push_back({name, 1});
      }
    }
  }
  return js::JoinQuery(attributes, relations);
}

std::vector<std::pair<int, js::Frequency>> ParseBuckets(const std::string& text) {
  std::vector<std::pair<int, js::Frequency>> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw js::Error(js::ErrorCode::kInfeasibleSpec, "bucket entries look like i:OUT");
    }
    out.emplace_back(std::stoi(item.substr(0, colon)), std::stoll(item.substr(colon + 1)));
  }
  return out;
}

json Manifest(const js::GeneratedInstance& g, const std::string& generator, double beta) {
  const js::Instance& inst = g.instance;
  const auto rs = js::residual_sensitivity(inst, beta);
  json m;
  m["generator"] = generator;
  m["description"] = g.description;
  m["n"] = inst.input_size();
  m["count"] = js::count(inst);
  m["ls"] = rs.local;
  m["rs"] = rs.residual;
  m["beta"] = beta;
  m["declared_count"] = g.count;
  m["declared_ls"] = g.local_sensitivity;
  m["nominal_domain_size"] = g.nominal_domain_size;
  m["domain_size"] = inst.query().joined_domain_size();
  return m;
}

struct GenerateArgs {
  std::string gen;
  std::uint32_t n = 9;
  std::uint32_t domain = 0;
  std::uint64_t delta = 3;
  std::uint32_t sqrt_n = 4;
  std::uint64_t k = 8;
  std::string schema = "A;A,B;A,C";
  std::string buckets = "1:8,3:64";
  double lambda = 1.0;
  double beta = 1.0;
  std::string out = "instance.json";
  std::string manifest;
};

int RunGenerate(const GenerateArgs& a) {
  js::GeneratedInstance g;
  if (a.gen == "lb2") {
    g = js::gen_two_table_lb(EvenTable(a.domain == 0 ? a.n : a.domain, a.n),
                             static_cast<std::uint32_t>(a.delta));
  } else if (a.gen == "lbmulti") {
    g = js::gen_multi_table_lb(SchemaQuery(a.schema),
                               EvenTable(a.domain == 0 ? a.n : a.domain, a.n), a.delta);
  } else if (a.gen == "staircase") {
    g = js::gen_staircase(a.sqrt_n);
  } else if (a.gen == "gap") {
    g = js::gen_gap(a.k);
  } else if (a.gen == "conforming") {
    g = js::gen_bucket_conforming(ParseBuckets(a.buckets), a.lambda);
  } else {
    throw js::Error(js::ErrorCode::kInfeasibleSpec, "unknown generator \"" + a.gen + "\"");
  }
  js::save_instance(g.instance, a.out);
  const std::string manifest_path =
      a.manifest.empty()
          ? std::filesystem::path(a.out).replace_extension(".manifest.json").string()
          : a.manifest;
  const json m = Manifest(g, a.gen, a.beta);
  WriteFile(manifest_path, m.dump(2) + "\n");
  std::cout << m.dump(2) << "\n";
  return 0;
}

struct VerifyArgs {
  std::string instance;
  double beta = 1.0;
};

int RunVerify(const VerifyArgs& a) {
  const js::Instance inst = js::load_instance(a.instance);
  const js::JoinQuery& q = inst.query();
  const auto rs = js::residual_sensitivity(inst, a.beta);
  const bool hierarchical = js::is_hierarchical(q);
  json out;
  out["n"] = inst.input_size();
  out["count"] = js::count(inst);
  out["ls"] = rs.local;
  out["rs"] = rs.residual;
  out["beta"] = a.beta;
  out["k_star"] = rs.k_star;
  out["hierarchical"] = hierarchical;
  out["domain_size"] = q.joined_domain_size();
  std::cout << out.dump(2) << "\n";
  if (hierarchical) std::cout << js::attribute_forest(q).render();
  return 0;
}

struct ReleaseArgs {
  std::string instance;
  std::string pipeline = "two_table";
  double epsilon = 1.0;
  double delta = 1.0 / 1024.0;
  int iterations = 0;
  std::string seeds = "0";
  std::string family_file;
  std::string family_kind = "random_sign";
  std::size_t family_size = 64;
  std::uint64_t family_seed = 0;
  bool include_counting = false;
  std::string out_dir = "release_out";
  std::size_t cap = js::kDefaultSupportCap;
  double sparse_threshold = 0.0;
  double nominal_domain = 0.0;
};

js::FamilySpec FamilyFrom(const ReleaseArgs& a) {
  if (!a.family_file.empty()) return js::parse_family_spec(ReadFile(a.family_file));
  js::FamilySpec spec;
  spec.kind = a.family_kind;
  spec.size = a.family_size;
  spec.seed = a.family_seed;
  spec.include_counting = a.include_counting;
  return spec;
}

json RunConfigJson(const ReleaseArgs& a, const js::FamilySpec& family,
                   const std::vector<std::uint64_t>& seeds) {
  json c;
  c["instance"] = a.instance;
  c["pipeline"] = a.pipeline;
  c["epsilon"] = a.epsilon;
  c["delta"] = a.delta;
  c["iterations"] = a.iterations > 0 ? json(a.iterations) : json("auto");
  c["seeds"] = seeds;
  c["family"] = json::parse(js::family_spec_to_json(family));
  c["cap"] = a.cap;
  c["sparse_threshold"] = a.sparse_threshold;
  if (a.nominal_domain > 0.0) c["nominal_domain_size"] = a.nominal_domain;
  return c;
}

int RunRelease(const ReleaseArgs& a, bool bench_only) {
  const js::Instance inst = js::load_instance(a.instance);
  const js::PrivacyParams params(a.epsilon, a.delta);
  const js::FamilySpec spec = FamilyFrom(a);
  const js::QueryFamily family = js::build_family(inst.query(), spec);
  const auto seeds = ParseSeeds(a.seeds);

  js::ExperimentOptions options;
  options.release.cap = a.cap;
  if (a.iterations > 0) options.release.iterations = a.iterations;
  if (a.nominal_domain > 0.0) {
    options.release.nominal_domain_size = a.nominal_domain;
    options.nominal_domain_size = a.nominal_domain;
  }
  std::optional<js::ReleaseReport> first;
  options.on_report = [&](std::uint64_t, const js::ReleaseReport& r) {
    if (!first && !bench_only) first = r;
  };
  if (std::find(js::pipeline_ids().begin(), js::pipeline_ids().end(), a.pipeline) ==
          js::pipeline_ids().end() ||
      a.pipeline == "exact") {
    throw js::Error(js::ErrorCode::kInvalidArgument, "unknown pipeline \"" + a.pipeline + "\"");
  }
  const js::ErrorTable table =
      js::run_experiment(a.pipeline, inst, family, params, seeds, options);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  WriteFile(dir / "config.json", RunConfigJson(a, spec, seeds).dump(2) + "\n");
  std::ostringstream errors;
  js::write_error_csv(errors, table);
  WriteFile(dir / "errors.csv", errors.str());
  WriteFile(dir / "errors.json", js::error_table_to_json(table) + "\n");
  if (first) {
    std::ostringstream csv;
    js::write_synthetic_csv(csv, first->synthetic, a.sparse_threshold);
    WriteFile(dir / "synthetic.csv", csv.str());
    WriteFile(dir / "report.json", js::report_to_json(*first) + "\n");
  }
  std::cout << "pipeline=" << table.pipeline << " seeds=" << table.rows.size()
            << " median_error=" << table.median_error << " envelope=" << table.envelope
            << " median_ratio=" << table.median_ratio << "\n";
  return 0;
}

template <typename T>
void ApplyDefault(const json& defaults, const char* key, T& target) {
  if (auto it = defaults.find(key); it != defaults.end()) target = it->get<T>();
}

void AddReleaseOptions(CLI::App* cmd, ReleaseArgs& a) {
  cmd->add_option("--instance,-i", a.instance, "instance JSON file")->required();
  cmd->add_option("--pipeline,-p", a.pipeline,
                  "two_table | multi_table | unif_two_table | unif_hierarchical");
  cmd->add_option("--epsilon", a.epsilon);
  cmd->add_option("--delta", a.delta);
  cmd->add_option("--iterations", a.iterations, "PMW rounds; 0 = automatic");
  cmd->add_option("--seeds", a.seeds, "comma list, ranges like 0-20 allowed");
  cmd->add_option("--family", a.family_file, "family spec JSON file");
  cmd->add_option("--family-kind", a.family_kind, "counting | random_sign | interval");
  cmd->add_option("--family-size", a.family_size);
  cmd->add_option("--family-seed", a.family_seed);
  cmd->add_flag("--include-counting", a.include_counting);
  cmd->add_option("--out,-o", a.out_dir, "output directory");
  cmd->add_option("--cap", a.cap, "dense joined-domain cap");
  cmd->add_option("--sparse-threshold", a.sparse_threshold);
  cmd->add_option("--nominal-domain", a.nominal_domain, "|D| used by the error formulas");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic data for multi-table joins"};
  app.require_subcommand(1);

  json defaults;
  try {
    defaults = LoadDefaults();
  } catch (const js::Error& e) {
    std::cerr << e.what() << "\n";
    return ExitCodeFor(e.code());
  }

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a generated instance and manifest");
  generate->add_option("--gen", gen.gen, "lb2 | lbmulti | staircase | gap | conforming")
      ->required();
  generate->add_option("--n", gen.n, "single-table size (lb2, lbmulti)");
  generate->add_option("--domain", gen.domain, "single-table domain size; defaults to n");
  generate->add_option("--delta", gen.delta, "target local sensitivity (lb2, lbmulti)");
  generate->add_option("--schema", gen.schema, "relations for lbmulti, e.g. \"A;A,B;A,C\"");
  generate->add_option("--sqrt-n", gen.sqrt_n, "staircase size");
  generate->add_option("--k", gen.k, "gap parameter (power of 8)");
  generate->add_option("--buckets", gen.buckets, "conforming vector, e.g. \"1:8,3:64\"");
  generate->add_option("--lambda", gen.lambda, "bucket scale for conforming");
  generate->add_option("--beta", gen.beta, "beta for the manifest's residual sensitivity");
  generate->add_option("--out,-o", gen.out, "instance output path");
  generate->add_option("--manifest", gen.manifest, "manifest path");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "print statistics of an instance file");
  verify->add_option("instance", verify_args.instance)->required();
  verify->add_option("--beta", verify_args.beta);

  ReleaseArgs release_args;
  ApplyDefault(defaults, "pipeline", release_args.pipeline);
  ApplyDefault(defaults, "epsilon", release_args.epsilon);
  ApplyDefault(defaults, "delta", release_args.delta);
  ApplyDefault(defaults, "seeds", release_args.seeds);
  ApplyDefault(defaults, "cap", release_args.cap);
  ApplyDefault(defaults, "family_size", release_args.family_size);
  ApplyDefault(defaults, "family_kind", release_args.family_kind);
  ReleaseArgs bench_args = release_args;
  bench_args.seeds = "0-20";
  bench_args.out_dir = "bench_out";
  auto* release = app.add_subcommand("release", "release a synthetic distribution");
  AddReleaseOptions(release, release_args);
  auto* bench = app.add_subcommand("bench", "error table over many seeds");
  AddReleaseOptions(bench, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return RunGenerate(gen);
    if (*verify) return RunVerify(verify_args);
    if (*release) return RunRelease(release_args, false);
    if (*bench) return RunRelease(bench_args, true);
  } catch (const js::Error& e) {
    std::cerr << "joinsynth: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "joinsynth: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitUsage;
}
