/*
 * Copyright 2026 The catforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "catforest/model_io.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "catforest/errors.h"
#include "catforest/util.h"

namespace catforest {
namespace {

using nlohmann::json;

json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void WriteJson(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::uint64_t ParseHexDigest(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("bad hex digest '" + s + "'");
  }
  return v;
}

json SplitToJson(const SplitRule& r) {
  json j;
  j["predictor"] = r.predictor;
  if (r.kind == SplitKind::kOrdered) {
    j["kind"] = "ordered";
    j["threshold"] = r.threshold;
    return j;
  }
  j["kind"] = "categorical";
  j["method"] = MethodName(r.method);
  j["num_levels"] = r.present.num_levels();
  j["present"] = r.present.ToHex();
  j["absent"] = r.absent.ToHex();
  j["left_levels"] = r.left_levels.ToHex();
  j["bitmask"] = r.bitmask.ToHex();
  if (!r.gamma.empty()) {
    json gamma = json::array();
    for (double g : r.gamma) gamma.push_back(std::isnan(g) ? json(nullptr) : json(g));
    j["gamma"] = std::move(gamma);
  }
  if (r.pseudo_split) j["pseudo_split"] = *r.pseudo_split;
  return j;
}

SplitRule SplitFromJson(const json& j) {
  SplitRule r;
  r.predictor = j.at("predictor").get<std::size_t>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ordered") {
    r.kind = SplitKind::kOrdered;
    r.threshold = j.at("threshold").get<double>();
    return r;
  }
  if (kind != "categorical") throw DataError("unknown split kind '" + kind + "'");
  r.kind = SplitKind::kCategorical;
  r.method = ParseMethod(j.at("method").get<std::string>());
  const auto q = j.at("num_levels").get<std::uint32_t>();
  r.present = LevelMask::FromHex(q, j.at("present").get<std::string>());
  r.absent = LevelMask::FromHex(q, j.at("absent").get<std::string>());
  r.left_levels = LevelMask::FromHex(q, j.at("left_levels").get<std::string>());
  r.bitmask = LevelMask::FromHex(q, j.at("bitmask").get<std::string>());
  if (r.absent != ~r.present || (r.left_levels & r.present) != r.left_levels ||
      (r.bitmask & r.present) != r.left_levels) {
    throw DataError("inconsistent level sets in categorical split");
  }
  if (j.contains("gamma")) {
    for (const json& g : j.at("gamma")) {
      r.gamma.push_back(g.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : g.get<double>());
    }
  }
  if (j.contains("pseudo_split")) r.pseudo_split = j.at("pseudo_split").get<double>();
  return r;
}

}  // namespace

std::string_view MethodName(CategoricalMethod m) {
  switch (m) {
    case CategoricalMethod::kPseudoValue: return "pseudo_value";
    case CategoricalMethod::kExhaustive: return "exhaustive";
    case CategoricalMethod::kRandom: return "random";
  }
  return "?";
}

CategoricalMethod ParseMethod(std::string_view token) {
  for (auto m : {CategoricalMethod::kPseudoValue, CategoricalMethod::kExhaustive,
                 CategoricalMethod::kRandom}) {
    if (MethodName(m) == token) return m;
  }
  throw DataError("unknown categorical method '" + std::string(token) + "'");
}

json TreeToJson(const Tree& tree) {
  json nodes = json::array();
  for (const Node& n : tree.nodes()) {
    json j;
    j["id"] = n.id;
    j["size"] = n.stats.size;
    if (tree.task() == Task::kRegression) {
      j["mean"] = n.stats.mean;
    } else {
      j["class_counts"] = n.stats.class_counts;
      j["proportions"] = n.stats.proportions;
      j["majority"] = n.stats.majority;
    }
    if (!n.is_leaf()) {
      j["split"] = SplitToJson(*n.split);
      j["left"] = n.left;
      j["right"] = n.right;
      j["left_size"] = n.left_size;
      j["right_size"] = n.right_size;
    }
    nodes.push_back(std::move(j));
  }
  return json{{"task", tree.task() == Task::kRegression ? "regression" : "classification"},
              {"num_classes", tree.num_classes()},
              {"structure_hash", HexDigest(StructureHash(tree))},
              {"nodes", std::move(nodes)}};
}

Tree TreeFromJson(const json& j) {
  try {
    const std::string task_name = j.at("task").get<std::string>();
    if (task_name != "regression" && task_name != "classification") {
      throw DataError("unknown task '" + task_name + "'");
    }
    const Task task = task_name == "regression" ? Task::kRegression
                                                : Task::kClassification;
    std::vector<Node> nodes;
    for (const json& jn : j.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<std::uint32_t>();
      n.stats.size = jn.at("size").get<std::uint64_t>();
      if (task == Task::kRegression) {
        n.stats.mean = jn.at("mean").get<double>();
      } else {
        n.stats.class_counts = jn.at("class_counts").get<std::vector<std::uint64_t>>();
        n.stats.proportions = jn.at("proportions").get<std::vector<double>>();
        n.stats.majority = jn.at("majority").get<std::uint32_t>();
      }
      if (jn.contains("split")) {
        n.split = SplitFromJson(jn.at("split"));
        n.left = jn.at("left").get<std::uint32_t>();
        n.right = jn.at("right").get<std::uint32_t>();
        n.left_size = jn.at("left_size").get<std::uint64_t>();
        n.right_size = jn.at("right_size").get<std::uint64_t>();
      }
      nodes.push_back(std::move(n));
    }
    Tree tree(task, j.at("num_classes").get<std::uint32_t>(), std::move(nodes));
    if (j.contains("structure_hash") &&
        ParseHexDigest(j.at("structure_hash").get<std::string>()) !=
            StructureHash(tree)) {
      throw DataError("tree does not match its stored structure hash");
    }
    return tree;
  } catch (const json::exception& e) {
    throw DataError(std::string("tree dump: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("tree dump: ") + e.what());
  }
}

json ForestConfigToJson(const ForestConfig& c) {
  const SplitMethodConfig& m = c.grow.methods;
  return json{
      {"num_trees", c.num_trees},
      {"sample_size", c.sample_size ? json(*c.sample_size) : json(nullptr)},
      {"mtry", c.grow.mtry},
      {"min_node_size", c.grow.min_node_size},
      {"binary_exhaustive_max_levels", m.binary_exhaustive_max_levels},
      {"multiclass_exhaustive_below", m.multiclass_exhaustive_below},
      {"random_candidates", m.random_candidates},
      {"exhaustive_limit", m.exhaustive_limit},
      {"seed", c.seed}};
}

ForestConfig ForestConfigFromJson(const json& j) {
  try {
    ForestConfig c;
    c.num_trees = j.at("num_trees").get<std::size_t>();
    if (!j.at("sample_size").is_null()) c.sample_size = j.at("sample_size").get<std::size_t>();
    c.grow.mtry = j.at("mtry").get<std::size_t>();
    c.grow.min_node_size = j.at("min_node_size").get<std::uint64_t>();
    SplitMethodConfig& m = c.grow.methods;
    m.binary_exhaustive_max_levels = j.at("binary_exhaustive_max_levels").get<std::uint32_t>();
    m.multiclass_exhaustive_below = j.at("multiclass_exhaustive_below").get<std::uint32_t>();
    m.random_candidates = j.at("random_candidates").get<std::uint32_t>();
    m.exhaustive_limit = j.at("exhaustive_limit").get<std::uint32_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("forest config: ") + e.what());
  }
}

void SaveForest(const Forest& forest, const DatasetSchema& schema,
                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest{{"format", "catforest-forest"},
                {"version", kModelFormatVersion},
                {"num_trees", forest.num_trees()},
                {"num_rows", forest.num_rows()},
                {"fingerprint", HexDigest(forest.fingerprint())},
                {"config", ForestConfigToJson(forest.config())},
                {"schema", schema.ToJson()}};
  WriteJson(manifest, dir / "manifest.json");
  for (std::size_t b = 0; b < forest.num_trees(); ++b) {
    json j = TreeToJson(forest.tree(b));
    const auto counts = forest.in_bag(b);
    j["in_bag"] = std::vector<std::uint32_t>(counts.begin(), counts.end());
    WriteJson(j, dir / ("tree_" + std::to_string(b) + ".json"));
  }
}

LoadedModel LoadForest(const std::filesystem::path& dir) {
  const json manifest = ReadJson(dir / "manifest.json");
  try {
    if (manifest.at("format").get<std::string>() != "catforest-forest" ||
        manifest.at("version").get<int>() != kModelFormatVersion) {
      throw DataError(dir.string() + " is not a supported forest dump");
    }
    const auto num_trees = manifest.at("num_trees").get<std::size_t>();
    const auto num_rows = manifest.at("num_rows").get<std::size_t>();
    std::vector<Tree> trees;
    std::vector<std::uint32_t> in_bag;
    for (std::size_t b = 0; b < num_trees; ++b) {
      const json j = ReadJson(dir / ("tree_" + std::to_string(b) + ".json"));
      trees.push_back(TreeFromJson(j));
      const auto counts = j.at("in_bag").get<std::vector<std::uint32_t>>();
      if (counts.size() != num_rows) throw DataError("in-bag row length mismatch");
      in_bag.insert(in_bag.end(), counts.begin(), counts.end());
    }
    Forest forest(ForestConfigFromJson(manifest.at("config")), std::move(trees),
                  std::move(in_bag), num_rows,
                  ParseHexDigest(manifest.at("fingerprint").get<std::string>()));
    return {std::move(forest), DatasetSchema::FromJson(manifest.at("schema"))};
  } catch (const json::exception& e) {
    throw DataError(dir.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
}

}  // namespace catforest
