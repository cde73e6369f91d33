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

#include "catforest/experiment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "catforest/errors.h"
#include "catforest/util.h"

namespace catforest {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool IsRouting(Heuristic h) { return h != Heuristic::kOneHot; }

bool Contains(const std::vector<Heuristic>& hs, Heuristic h) {
  return std::find(hs.begin(), hs.end(), h) != hs.end();
}

std::string Cell(double v) { return std::isnan(v) ? "NA" : FormatDouble(v); }

std::string Name(Heuristic h) { return std::string(HeuristicName(h)); }

std::string PairName(const std::pair<Heuristic, Heuristic>& p) {
  return Name(p.first) + ":" + Name(p.second);
}

std::ofstream OpenOutput(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<Heuristic> ParseHeuristicList(const json& j) {
  std::vector<Heuristic> out;
  for (const json& t : j) {
    try {
      const Heuristic h = ParseHeuristic(t.get<std::string>());
      if (Contains(out, h)) throw DataError("duplicate heuristic '" + Name(h) + "'");
      out.push_back(h);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  return out;
}

std::uint32_t PositiveClass(const ExperimentConfig& cfg, const ResponseSpec& spec) {
  if (!cfg.positive_class) return spec.num_classes() - 1;
  for (std::uint32_t k = 0; k < spec.num_classes(); ++k) {
    if (spec.classes[k] == *cfg.positive_class) return k;
  }
  throw DataError("positive_class '" + *cfg.positive_class + "' is not a response class");
}

std::string BucketLabel(const DifferenceBucket& b) {
  return FormatDouble(b.lower) + "-" + FormatDouble(b.upper);
}

struct MetricSpec {
  std::string name;
  Orientation orientation;
};

// Absolute metrics with a relative counterpart named "rel_<name>".
std::vector<MetricSpec> RelativeMetrics(const Dataset& d) {
  if (d.task() == Task::kRegression) return {{"rmse", Orientation::kLowerBetter}};
  std::vector<MetricSpec> out{{"log_loss", Orientation::kLowerBetter}};
  if (d.num_classes() == 2) {
    out.push_back({"roc_auc", Orientation::kHigherBetter});
    out.push_back({"pr_auc", Orientation::kHigherBetter});
  }
  return out;
}

void ComputeMetrics(const Dataset& d, const ExperimentConfig& cfg, double epsilon,
                    ReplicationReport& rep) {
  std::vector<std::size_t> rows;
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    bool all = true;
    for (const auto& [h, set] : rep.oob) all = all && set.rows[n].defined;
    if (all) rows.push_back(n);
  }
  rep.evaluated_rows = rows.size();
  if (rows.empty()) {
    throw ComputeError("no observation has an OOB prediction under every heuristic");
  }

  std::vector<std::uint32_t> truth_classes;
  std::vector<double> truth;
  for (std::size_t n : rows) {
    truth.push_back(d.response(n));
    if (d.task() == Task::kClassification) truth_classes.push_back(d.class_of(n));
  }
  std::map<Heuristic, std::vector<std::uint32_t>> votes;
  for (const auto& [h, set] : rep.oob) {
    if (d.task() == Task::kRegression) {
      std::vector<double> pred;
      for (std::size_t n : rows) pred.push_back(set.rows[n].value);
      rep.metrics["rmse"][h] = Rmse(truth, pred);
      continue;
    }
    std::vector<std::vector<double>> probs;
    for (std::size_t n : rows) {
      probs.push_back(set.rows[n].probabilities);
      votes[h].push_back(set.rows[n].predicted_class);
    }
    rep.metrics["log_loss"][h] = LogLoss(probs, truth_classes, epsilon);
    if (d.num_classes() == 2) {
      const std::uint32_t positive = PositiveClass(cfg, d.response_spec());
      std::vector<double> scores;
      for (const auto& p : probs) scores.push_back(p[positive]);
      rep.metrics["roc_auc"][h] = RocAuc(scores, truth_classes, positive);
      rep.metrics["pr_auc"][h] = PrAuc(scores, truth_classes, positive);
    }
  }
  if (d.task() == Task::kClassification) {
    for (std::size_t i = 0; i < cfg.heuristics.size(); ++i) {
      for (std::size_t j = i + 1; j < cfg.heuristics.size(); ++j) {
        const Heuristic a = cfg.heuristics[i];
        const Heuristic b = cfg.heuristics[j];
        rep.kappa[{a, b}] = CohenKappa(votes.at(a), votes.at(b), d.num_classes());
      }
    }
  }
  const std::vector<Heuristic> baseline = cfg.EffectiveBaseline();
  if (baseline.empty()) return;
  for (const MetricSpec& m : RelativeMetrics(d)) {
    rep.metrics["rel_" + m.name] =
        RelativeToBest(rep.metrics.at(m.name), baseline, m.orientation);
  }
}

void WriteReplication(const ReplicationReport& rep, const Dataset& d,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out = OpenOutput(dir / "metrics.csv");
    out << "replication,heuristic,metric,value\n";
    for (const auto& [metric, values] : rep.metrics) {
      for (const auto& [h, v] : values) {
        out << rep.replication << ',' << Name(h) << ',' << metric << ',' << Cell(v)
            << '\n';
      }
    }
    for (const auto& [pair, v] : rep.kappa) {
      out << rep.replication << ',' << PairName(pair) << ",kappa," << Cell(v) << '\n';
    }
    out << rep.replication << ",*,evaluated_rows," << rep.evaluated_rows << '\n';
  }
  for (const auto& [h, set] : rep.oob) {
    std::ofstream out = OpenOutput(dir / ("oob_" + Name(h) + ".csv"));
    WriteOobCsv(set, d.response_spec(), out);
  }
  std::ofstream out = OpenOutput(dir / "forest_hashes.csv");
  out << "tree,shared,onehot\n";
  const std::size_t trees = std::max(rep.shared_hashes.size(), rep.onehot_hashes.size());
  for (std::size_t b = 0; b < trees; ++b) {
    out << b << ','
        << (b < rep.shared_hashes.size() ? HexDigest(rep.shared_hashes[b]) : "NA") << ','
        << (b < rep.onehot_hashes.size() ? HexDigest(rep.onehot_hashes[b]) : "NA")
        << '\n';
  }
}

void WriteSummary(const ExperimentSummary& s, const std::filesystem::path& dir) {
  std::ofstream out = OpenOutput(dir / "summary.csv");
  out << "heuristic,metric,statistic,value\n";
  auto emit = [&](const std::string& who, const std::string& metric,
                  const std::vector<double>& values) {
    if (values.empty()) return;
    const SummaryStats st = Summarize(values);
    const std::pair<const char*, double> rows[] = {
        {"count", static_cast<double>(st.count)},
        {"min", st.min}, {"q1", st.q1}, {"median", st.median},
        {"mean", st.mean}, {"q3", st.q3}, {"max", st.max}};
    for (const auto& [stat, v] : rows) {
      out << who << ',' << metric << ',' << stat << ',' << Cell(v) << '\n';
    }
  };
  for (const auto& [metric, by_h] : s.series) {
    for (const auto& [h, values] : by_h) emit(Name(h), metric, values);
    auto w = s.wins.find(metric);
    if (w == s.wins.end()) continue;
    for (const auto& [h, count] : w->second) {
      out << Name(h) << ',' << metric << ",wins," << count << '\n';
    }
  }
  for (const auto& [pair, values] : s.kappa) emit(PairName(pair), "kappa", values);
  std::vector<double> defined;
  for (const auto& a : s.absence) {
    if (a) defined.push_back(*a);
  }
  emit("*", "absence_proportion", defined);
  out << "*,absence_proportion,undefined," << (s.absence.size() - defined.size()) << '\n';
}

void WriteDifferences(const ExperimentSummary& s, const std::filesystem::path& dir) {
  std::ofstream out = OpenOutput(dir / "paired_differences.csv");
  out << "h1,h2,bucket,count,mean,lo95,hi95,excludes_zero\n";
  for (const auto& [pair, buckets] : s.differences) {
    for (const DifferenceBucket& b : buckets) {
      out << Name(pair.first) << ',' << Name(pair.second) << ',' << BucketLabel(b) << ','
          << b.count << ',' << Cell(b.mean) << ',' << Cell(b.lo95) << ','
          << Cell(b.hi95) << ',' << (b.excludes_zero ? "true" : "false") << '\n';
    }
  }
}

void WriteAbsence(const ExperimentSummary& s, const std::filesystem::path& dir) {
  std::ofstream out = OpenOutput(dir / "absence_proportions.csv");
  out << "observation,oob_trees,absent_trees,proportion\n";
  for (std::size_t n = 0; n < s.absence.size(); ++n) {
    out << n << ',' << s.oob_trees[n] << ',' << s.absent_trees[n] << ','
        << (s.absence[n] ? FormatDouble(*s.absence[n]) : "NA") << '\n';
  }
}

void WriteManifest(const ExperimentConfig& cfg, const Dataset& d,
                   const std::vector<std::uint64_t>& seeds, bool complete,
                   const std::string& error, std::optional<std::size_t> failed) {
  json manifest{{"version", std::string(kVersion)},
                {"complete", complete},
                {"config", cfg.ToJson()},
                {"dataset_fingerprint", HexDigest(d.Fingerprint())},
                {"rows", d.num_rows()},
                {"replications_completed", seeds.size() - (failed ? 1 : 0)},
                {"replication_seeds", seeds}};
  if (failed) {
    manifest["failed_replication"] = *failed;
    manifest["error"] = error;
  }
  std::ofstream out = OpenOutput(cfg.output / "manifest.json");
  out << manifest.dump(1) << '\n';
}

}  // namespace

ExperimentConfig ExperimentConfig::FromJson(const json& j,
                                            const std::filesystem::path& base_dir) {
  static const std::set<std::string> kKeys = {
      "data",       "schema",         "output",           "heuristics",
      "baseline",   "replications",   "seed",             "threads",
      "forest",     "positive_class", "log_loss_epsilon", "bucket_width"};
  static const std::set<std::string> kForestKeys = {
      "num_trees",          "mtry",          "min_node_size",
      "sample_size",        "binary_exhaustive_max_levels",
      "multiclass_exhaustive_below", "random_candidates", "exhaustive_limit"};
  if (!j.is_object()) throw DataError("experiment config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw DataError("unknown config key '" + key + "'");
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  ExperimentConfig c;
  try {
    if (j.contains("data")) c.data = resolve(j.at("data").get<std::string>());
    if (j.contains("schema")) c.schema = resolve(j.at("schema").get<std::string>());
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>());
    if (j.contains("heuristics")) c.heuristics = ParseHeuristicList(j.at("heuristics"));
    if (j.contains("baseline")) c.baseline = ParseHeuristicList(j.at("baseline"));
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("positive_class")) {
      c.positive_class = j.at("positive_class").get<std::string>();
    }
    if (j.contains("log_loss_epsilon")) {
      c.log_loss_epsilon = j.at("log_loss_epsilon").get<double>();
    }
    c.bucket_width = j.value("bucket_width", c.bucket_width);
    if (j.contains("forest")) {
      const json& f = j.at("forest");
      for (const auto& [key, value] : f.items()) {
        if (!kForestKeys.contains(key)) {
          throw DataError("unknown forest config key '" + key + "'");
        }
      }
      if (f.contains("num_trees")) c.num_trees = f.at("num_trees").get<std::size_t>();
      if (f.contains("mtry")) c.mtry = f.at("mtry").get<std::size_t>();
      if (f.contains("min_node_size")) {
        c.min_node_size = f.at("min_node_size").get<std::uint64_t>();
      }
      if (f.contains("sample_size")) c.sample_size = f.at("sample_size").get<std::size_t>();
      SplitMethodConfig& m = c.methods;
      m.binary_exhaustive_max_levels =
          f.value("binary_exhaustive_max_levels", m.binary_exhaustive_max_levels);
      m.multiclass_exhaustive_below =
          f.value("multiclass_exhaustive_below", m.multiclass_exhaustive_below);
      m.random_candidates = f.value("random_candidates", m.random_candidates);
      m.exhaustive_limit = f.value("exhaustive_limit", m.exhaustive_limit);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("experiment config: ") + e.what());
  }
  if (c.replications < 1) throw DataError("replications must be >= 1");
  if (c.heuristics.empty()) throw DataError("heuristics must not be empty");
  for (Heuristic h : c.baseline) {
    if (!IsRouting(h) || h == Heuristic::kLeft || h == Heuristic::kRight ||
        !Contains(c.heuristics, h)) {
      throw DataError("baseline heuristic '" + Name(h) +
                      "' must be a listed heuristic other than left, right, onehot");
    }
  }
  if ((c.num_trees && *c.num_trees < 1) || (c.sample_size && *c.sample_size < 1) ||
      (c.mtry && *c.mtry < 1)) {
    throw DataError("forest num_trees, sample_size and mtry must be >= 1");
  }
  if (c.log_loss_epsilon && !(*c.log_loss_epsilon > 0.0 && *c.log_loss_epsilon < 0.5)) {
    throw DataError("log_loss_epsilon must be in (0, 0.5)");
  }
  if (!(c.bucket_width > 0.0 && c.bucket_width <= 1.0)) {
    throw DataError("bucket_width must be in (0, 1]");
  }
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

json ExperimentConfig::ToJson() const {
  auto names = [](const std::vector<Heuristic>& hs) {
    std::vector<std::string> out;
    for (Heuristic h : hs) out.push_back(Name(h));
    return out;
  };
  json forest{{"binary_exhaustive_max_levels", methods.binary_exhaustive_max_levels},
              {"multiclass_exhaustive_below", methods.multiclass_exhaustive_below},
              {"random_candidates", methods.random_candidates},
              {"exhaustive_limit", methods.exhaustive_limit}};
  if (num_trees) forest["num_trees"] = *num_trees;
  if (mtry) forest["mtry"] = *mtry;
  if (min_node_size) forest["min_node_size"] = *min_node_size;
  if (sample_size) forest["sample_size"] = *sample_size;
  json j{{"data", data.string()},
         {"schema", schema.string()},
         {"output", output.string()},
         {"heuristics", names(heuristics)},
         {"baseline", names(EffectiveBaseline())},
         {"replications", replications},
         {"seed", seed},
         {"threads", threads},
         {"forest", std::move(forest)},
         {"bucket_width", bucket_width}};
  if (positive_class) j["positive_class"] = *positive_class;
  if (log_loss_epsilon) j["log_loss_epsilon"] = *log_loss_epsilon;
  return j;
}

std::vector<Heuristic> ExperimentConfig::EffectiveBaseline() const {
  if (!baseline.empty()) return baseline;
  std::vector<Heuristic> out;
  for (Heuristic h : kDefaultBaseline) {
    if (Contains(heuristics, h)) out.push_back(h);
  }
  return out;
}

ForestConfig ExperimentConfig::ForestFor(const Dataset& d, std::uint64_t forest_seed) const {
  ForestConfig c = ForestConfig::Defaults(d);
  if (num_trees) c.num_trees = *num_trees;
  if (mtry) c.grow.mtry = std::min(*mtry, d.num_predictors());
  if (min_node_size) c.grow.min_node_size = *min_node_size;
  c.sample_size = sample_size;
  c.grow.methods = methods;
  c.seed = forest_seed;
  return c;
}

std::vector<double> PairedValues(const OobPredictionSet& set, const Dataset& d,
                                 std::uint32_t positive) {
  std::vector<double> out(set.rows.size(), kNaN);
  for (std::size_t n = 0; n < set.rows.size(); ++n) {
    const OobPrediction& p = set.rows[n];
    if (!p.defined) continue;
    if (set.task == Task::kRegression) {
      out[n] = p.value;
    } else if (set.num_classes == 2) {
      out[n] = p.probabilities[positive];
    } else {
      out[n] = p.probabilities[d.class_of(n)];
    }
  }
  return out;
}

ReplicationReport RunReplication(const Dataset& d, const Dataset* onehot,
                                 const ExperimentConfig& cfg, std::size_t r) {
  ReplicationReport rep;
  rep.replication = r;
  rep.seed = DeriveSeed(cfg.seed, SeedTag::kReplication, {r});
  std::size_t num_trees = 0;

  const bool any_routing =
      std::any_of(cfg.heuristics.begin(), cfg.heuristics.end(), IsRouting);
  if (any_routing) {
    const ForestConfig fc = cfg.ForestFor(d, rep.seed);
    num_trees = fc.num_trees;
    const Forest forest = TrainForest(d, fc, cfg.threads);
    for (const Tree& t : forest.trees()) rep.shared_hashes.push_back(StructureHash(t));
    for (Heuristic h : cfg.heuristics) {
      if (IsRouting(h)) rep.oob[h] = OobPredictAll(forest, d, h, cfg.threads);
    }
  }
  if (Contains(cfg.heuristics, Heuristic::kOneHot)) {
    if (onehot == nullptr) throw std::invalid_argument("RunReplication: one-hot data missing");
    const ForestConfig fc = cfg.ForestFor(*onehot, rep.seed);
    num_trees = fc.num_trees;
    const Forest forest = TrainForest(*onehot, fc, cfg.threads);
    for (const Tree& t : forest.trees()) rep.onehot_hashes.push_back(StructureHash(t));
    // The encoded data has no categorical predictors, so the policy is never
    // consulted; passing onehot makes any consultation an error.
    rep.oob[Heuristic::kOneHot] =
        OobPredictAll(forest, *onehot, Heuristic::kOneHot, cfg.threads);
  }
  const double epsilon =
      cfg.log_loss_epsilon.value_or(1.0 / (2.0 * static_cast<double>(num_trees)));
  ComputeMetrics(d, cfg, epsilon, rep);
  return rep;
}

ExperimentSummary RunExperiment(const Dataset& d, const ExperimentConfig& cfg) {
  if (cfg.replications < 1) throw DataError("replications must be >= 1");
  std::optional<Dataset> onehot;
  if (Contains(cfg.heuristics, Heuristic::kOneHot)) onehot = OneHotTransform(d);
  const bool write = !cfg.output.empty();
  if (write) std::filesystem::create_directories(cfg.output);

  ExperimentSummary s;
  s.task = d.task();
  const std::uint32_t positive =
      d.task() == Task::kClassification && d.num_classes() == 2
          ? PositiveClass(cfg, d.response_spec())
          : 0;
  const std::vector<Heuristic> baseline = cfg.EffectiveBaseline();
  std::map<Heuristic, std::vector<std::vector<double>>> paired;
  std::vector<OobPredictionSet> absence_sets;
  std::vector<std::uint64_t> seeds;

  for (std::size_t r = 0; r < cfg.replications; ++r) {
    seeds.push_back(DeriveSeed(cfg.seed, SeedTag::kReplication, {r}));
    ReplicationReport rep;
    try {
      rep = RunReplication(d, onehot ? &*onehot : nullptr, cfg, r);
      if (write) {
        WriteReplication(rep, d, cfg.output / ("replication_" + std::to_string(r)));
      }
    } catch (const std::exception& e) {
      const std::string message = "replication " + std::to_string(r) + ": " + e.what();
      if (write) WriteManifest(cfg, d, seeds, false, message, r);
      if (dynamic_cast<const DataError*>(&e) != nullptr) throw DataError(message);
      throw ComputeError(message);
    }

    for (const auto& [metric, values] : rep.metrics) {
      for (const auto& [h, v] : values) s.series[metric][h].push_back(v);
    }
    for (const auto& [pair, v] : rep.kappa) s.kappa[pair].push_back(v);
    if (!baseline.empty()) {
      for (const MetricSpec& m : RelativeMetrics(d)) {
        const std::string rel = "rel_" + m.name;
        auto& wins = s.wins[rel];
        for (Heuristic h : baseline) wins.try_emplace(h, 0);
        ++wins[BestMember(rep.metrics.at(m.name), baseline, m.orientation)];
      }
    }
    for (const auto& [h, set] : rep.oob) paired[h].push_back(PairedValues(set, d, positive));
    // Absence is decided before the first indeterminate split is resolved, so
    // every routing heuristic reports the same flags; use the first one.
    const auto first = std::find_if(cfg.heuristics.begin(), cfg.heuristics.end(), IsRouting);
    absence_sets.push_back(rep.oob.at(first != cfg.heuristics.end() ? *first
                                                                    : Heuristic::kOneHot));
    for (auto& [h, set] : rep.oob) set.rows.clear();
    s.reports.push_back(std::move(rep));
  }

  s.absence = AbsenceProportions(absence_sets);
  s.absent_trees.assign(d.num_rows(), 0);
  s.oob_trees.assign(d.num_rows(), 0);
  for (const OobPredictionSet& set : absence_sets) {
    for (std::size_t n = 0; n < d.num_rows(); ++n) {
      s.absent_trees[n] += set.rows[n].absent_trees;
      s.oob_trees[n] += set.rows[n].oob_trees;
    }
  }
  std::vector<double> absence(d.num_rows(), kNaN);
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    if (s.absence[n]) absence[n] = *s.absence[n];
  }
  for (std::size_t i = 0; i < cfg.heuristics.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.heuristics.size(); ++j) {
      const Heuristic a = cfg.heuristics[i];
      const Heuristic b = cfg.heuristics[j];
      s.differences[{a, b}] =
          PairedDifferenceSummary(paired.at(a), paired.at(b), absence, cfg.bucket_width);
    }
  }

  if (write) {
    WriteSummary(s, cfg.output);
    WriteDifferences(s, cfg.output);
    WriteAbsence(s, cfg.output);
    WriteManifest(cfg, d, seeds, true, "", std::nullopt);
  }
  return s;
}

ExperimentSummary RunExperiment(const ExperimentConfig& cfg) {
  const DatasetSchema schema = DatasetSchema::Load(cfg.schema);
  const IngestResult ingest = IngestCsv(cfg.data, schema);
  return RunExperiment(ingest.dataset, cfg);
}

}  // namespace catforest
