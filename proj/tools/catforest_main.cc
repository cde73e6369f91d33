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

// catforest command line: train, predict, experiment, transform, inspect.
//
// Exit codes: 0 success, 2 usage error, 3 data error (unreadable or invalid
// input), 4 computational error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "catforest/dataset.h"
#include "catforest/errors.h"
#include "catforest/experiment.h"
#include "catforest/forest.h"
#include "catforest/model_io.h"
#include "catforest/policy.h"
#include "catforest/util.h"

namespace {

using namespace catforest;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCompute = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string JoinLabels(const LevelMask& mask, const ColumnSchema& column) {
  std::string out;
  for (std::uint32_t q : mask.levels()) {
    if (!out.empty()) out += '|';
    out += column.levels.at(q);
  }
  return out;
}

std::string Quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct TrainArgs {
  std::string data, schema, out;
  std::optional<std::size_t> trees, mtry, sample_size;
  std::optional<std::uint64_t> min_node_size;
  std::uint64_t seed = 1;
  int threads = 0;
};

int RunTrain(const TrainArgs& a) {
  const DatasetSchema schema = DatasetSchema::Load(a.schema);
  const IngestResult ingest = IngestCsv(a.data, schema);
  const Dataset& d = ingest.dataset;
  ForestConfig config = ForestConfig::Defaults(d);
  if (a.trees) config.num_trees = *a.trees;
  if (a.mtry) config.grow.mtry = *a.mtry;
  if (a.min_node_size) config.grow.min_node_size = *a.min_node_size;
  config.sample_size = a.sample_size;
  config.seed = a.seed;
  if (config.grow.mtry > d.num_predictors()) {
    throw UsageError("--mtry exceeds the number of predictors (" +
                     std::to_string(d.num_predictors()) + ")");
  }
  const Forest forest = TrainForest(d, config, a.threads);
  SaveForest(forest, schema, a.out);
  std::cerr << "trained " << forest.num_trees() << " trees on " << d.num_rows()
            << " rows (" << ingest.dropped_rows << " dropped for missing values)\n";
  return 0;
}

struct PredictArgs {
  std::string model, data, out, heuristic = "dbi";
  bool oob = false;
  int threads = 0;
};

int RunPredict(const PredictArgs& a) {
  const LoadedModel model = LoadForest(a.model);
  const Forest& forest = model.forest;
  const Heuristic policy = ParseHeuristic(a.heuristic);
  const Dataset d = IngestCsv(a.data, model.schema).dataset;
  Output out(a.out);
  if (a.oob) {
    WriteOobCsv(OobPredictAll(forest, d, policy, a.threads), d.response_spec(),
                out.stream());
    return 0;
  }
  std::ostream& os = out.stream();
  os << "observation,prediction";
  if (d.task() == Task::kClassification) {
    for (const auto& label : d.response_spec().classes) os << ",p_" << label;
  }
  os << ",trees,absent_trees\n";
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    const ForestPrediction p = ForestPredict(forest, d, n, policy, n);
    os << n << ',';
    if (d.task() == Task::kRegression) {
      os << FormatDouble(p.value);
    } else {
      os << d.response_spec().classes.at(p.predicted_class);
      for (double v : p.probabilities) os << ',' << FormatDouble(v);
    }
    os << ',' << forest.num_trees() << ',' << p.absent_trees << '\n';
  }
  return 0;
}

int RunExperimentCommand(const std::string& config_path, std::optional<int> threads) {
  ExperimentConfig cfg = ExperimentConfig::Load(config_path);
  if (threads) cfg.threads = *threads;
  if (cfg.output.empty()) throw UsageError("experiment config needs an \"output\" path");
  const ExperimentSummary s = RunExperiment(cfg);
  std::cerr << "wrote " << s.reports.size() << " replications to "
            << cfg.output.string() << '\n';
  return 0;
}

int RunTransform(const std::string& data, const std::string& schema_path,
                 const std::string& out_data, const std::string& out_schema) {
  const DatasetSchema schema = DatasetSchema::Load(schema_path);
  const Dataset encoded = OneHotTransform(IngestCsv(data, schema).dataset);
  Output csv(out_data);
  WriteCsv(encoded, csv.stream());
  std::ofstream js(out_schema);
  if (!js) throw DataError("cannot write " + out_schema);
  js << SchemaFor(encoded).ToJson().dump(1) << '\n';
  return 0;
}

int RunInspect(const std::string& model_path, const std::string& out_path,
               bool all_splits) {
  const LoadedModel model = LoadForest(model_path);
  Output out(out_path);
  std::ostream& os = out.stream();
  os << "tree,node,predictor,kind,method,present,absent,left,threshold,left_size,"
        "right_size\n";
  for (std::size_t b = 0; b < model.forest.num_trees(); ++b) {
    for (const Node& n : model.forest.tree(b).nodes()) {
      if (n.is_leaf()) continue;
      const SplitRule& r = *n.split;
      const ColumnSchema& column = model.schema.predictors.at(r.predictor);
      if (r.kind == SplitKind::kOrdered) {
        if (!all_splits) continue;
        os << b << ',' << n.id << ',' << Quote(column.name) << ",ordered,,,,,"
           << FormatDouble(r.threshold);
      } else {
        os << b << ',' << n.id << ',' << Quote(column.name) << ",categorical,"
           << MethodName(r.method) << ',' << Quote(JoinLabels(r.present, column)) << ','
           << Quote(JoinLabels(r.absent, column)) << ','
           << Quote(JoinLabels(r.left_levels, column)) << ',';
      }
      os << ',' << n.left_size << ',' << n.right_size << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random forests with native categorical splits and absent-level routing"};
  app.require_subcommand(1);

  const std::vector<std::string> heuristic_tokens = {"left",   "right", "stop", "majority",
                                                     "random", "dbi",   "onehot"};

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit a forest and dump it");
  train_cmd->add_option("--data", train.data, "CSV file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--schema", train.schema, "JSON schema")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Model directory")->required();
  train_cmd->add_option("--trees", train.trees, "Number of trees (default 500)")->check(CLI::PositiveNumber);
  train_cmd->add_option("--mtry", train.mtry, "Predictors tried per node")->check(CLI::PositiveNumber);
  train_cmd->add_option("--min-node-size", train.min_node_size, "Split only larger nodes");
  train_cmd->add_option("--sample-size", train.sample_size, "Bootstrap size N'")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Master seed");
  train_cmd->add_option("--threads", train.threads, "Worker threads (0: OpenMP default)");

  PredictArgs predict;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Predict with a dumped forest");
  predict_cmd->add_option("--model", predict.model, "Model directory")->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--data", predict.data, "CSV in the model's schema")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--heuristic", predict.heuristic, "Absent-level routing")
      ->check(CLI::IsMember(heuristic_tokens));
  predict_cmd->add_flag("--oob", predict.oob, "OOB predictions; data must be the training set");
  predict_cmd->add_option("--out", predict.out, "Output CSV (default stdout)");
  predict_cmd->add_option("--threads", predict.threads, "Worker threads");

  std::string config_path;
  std::optional<int> experiment_threads;
  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Run a paired experiment");
  experiment_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  experiment_cmd->add_option("--threads", experiment_threads, "Override config threads");

  std::string t_data, t_schema, t_out_data, t_out_schema;
  CLI::App* transform_cmd = app.add_subcommand("transform", "One-hot encode a dataset");
  transform_cmd->add_option("--data", t_data, "CSV file")->required()->check(CLI::ExistingFile);
  transform_cmd->add_option("--schema", t_schema, "JSON schema")->required()->check(CLI::ExistingFile);
  transform_cmd->add_option("--out-data", t_out_data, "Encoded CSV")->required();
  transform_cmd->add_option("--out-schema", t_out_schema, "Schema of the encoded CSV")->required();

  std::string i_model, i_out;
  bool i_all = false;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "List present/absent levels per split");
  inspect_cmd->add_option("--model", i_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  inspect_cmd->add_option("--out", i_out, "Output CSV (default stdout)");
  inspect_cmd->add_flag("--all", i_all, "Include ordered splits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return RunTrain(train);
    if (*predict_cmd) return RunPredict(predict);
    if (*experiment_cmd) return RunExperimentCommand(config_path, experiment_threads);
    if (*transform_cmd) return RunTransform(t_data, t_schema, t_out_data, t_out_schema);
    if (*inspect_cmd) return RunInspect(i_model, i_out, i_all);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitUsage;
}
