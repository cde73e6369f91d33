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

#include "catforest/forest.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "catforest/errors.h"
#include "catforest/util.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catforest {
namespace {

// Collects the first exception thrown inside a parallel region so it can be
// rethrown on the calling thread.
class ExceptionSlot {
 public:
  template <typename F>
  void Run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void Rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

int ResolveThreads(int threads) {
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

void ValidateConfig(const Dataset& d, const ForestConfig& config) {
  if (config.num_trees < 1) throw std::invalid_argument("ForestConfig: B must be >= 1");
  if (config.sample_size && *config.sample_size < 1) {
    throw std::invalid_argument("ForestConfig: sample size must be >= 1");
  }
  if (config.grow.mtry < 1 || config.grow.mtry > d.num_predictors()) {
    throw std::invalid_argument("ForestConfig: mtry must be in [1, P]");
  }
}

struct TreeJob {
  Tree tree;
  std::vector<std::uint32_t> counts;
};

TreeJob GrowOne(const Dataset& d, const ForestConfig& config, std::size_t b) {
  const std::uint64_t tree_seed = DeriveSeed(config.seed, SeedTag::kTree, {b});
  Rng bootstrap_rng(DeriveSeed(tree_seed, SeedTag::kBootstrap));
  Rng grow_rng(DeriveSeed(tree_seed, SeedTag::kGrow));
  const std::size_t n = d.num_rows();
  const std::vector<std::uint32_t> sample =
      BootstrapSample(n, config.sample_size.value_or(n), bootstrap_rng);
  std::vector<std::uint32_t> counts(n, 0);
  for (std::uint32_t r : sample) ++counts[r];
  return {GrowTree(d, sample, config.grow, grow_rng), std::move(counts)};
}

Forest Assemble(const Dataset& d, const ForestConfig& config,
                std::vector<std::optional<TreeJob>>& jobs) {
  const std::size_t n = d.num_rows();
  std::vector<Tree> trees;
  trees.reserve(jobs.size());
  std::vector<std::uint32_t> in_bag;
  in_bag.reserve(jobs.size() * n);
  for (auto& job : jobs) {
    trees.push_back(std::move(job->tree));
    in_bag.insert(in_bag.end(), job->counts.begin(), job->counts.end());
  }
  return Forest(config, std::move(trees), std::move(in_bag), n, d.Fingerprint());
}

void CheckFingerprint(const Forest& forest, const Dataset& d) {
  if (d.num_rows() != forest.num_rows() || d.Fingerprint() != forest.fingerprint()) {
    throw DataError("OOB prediction requires the training dataset (fingerprint " +
                    HexDigest(forest.fingerprint()) + ", got " +
                    HexDigest(d.Fingerprint()) + ")");
  }
}

// Running per-observation aggregate; both OOB paths add trees in index order
// so their floating point results agree exactly.
struct OobAccumulator {
  double sum = 0.0;
  std::vector<std::uint64_t> votes;
  std::uint64_t oob_trees = 0;
  std::uint64_t absent_trees = 0;

  void Add(const PredictionTrace& trace, const Tree& tree) {
    const TreePrediction p = TreePredict(trace, tree);
    ++oob_trees;
    if (trace.absent_encountered) ++absent_trees;
    if (tree.task() == Task::kRegression) {
      sum += p.value;
    } else {
      ++votes[p.vote];
    }
  }

  OobPrediction Finish(Task task) const {
    OobPrediction out;
    out.oob_trees = oob_trees;
    out.absent_trees = absent_trees;
    out.defined = oob_trees > 0;
    if (!out.defined) return out;
    const double count = static_cast<double>(oob_trees);
    if (task == Task::kRegression) {
      out.value = sum / count;
      return out;
    }
    out.probabilities.resize(votes.size());
    for (std::size_t k = 0; k < votes.size(); ++k) {
      out.probabilities[k] = static_cast<double>(votes[k]) / count;
    }
    out.predicted_class = ArgMax(out.probabilities);
    out.value = out.predicted_class;
    return out;
  }
};

OobAccumulator MakeAccumulator(const Forest& forest) {
  OobAccumulator acc;
  if (forest.task() == Task::kClassification) acc.votes.assign(forest.num_classes(), 0);
  return acc;
}

}  // namespace

std::size_t DefaultMtry(Task task, std::size_t num_predictors) {
  if (task == Task::kRegression) return std::max<std::size_t>(1, num_predictors / 3);
  auto root = static_cast<std::size_t>(std::sqrt(static_cast<double>(num_predictors)));
  while (root * root > num_predictors) --root;
  while ((root + 1) * (root + 1) <= num_predictors) ++root;
  return std::max<std::size_t>(1, root);
}

std::uint64_t DefaultMinNodeSize(Task task) {
  return task == Task::kRegression ? 5 : 1;
}

ForestConfig ForestConfig::Defaults(const Dataset& d) {
  ForestConfig c;
  c.grow.mtry = DefaultMtry(d.task(), d.num_predictors());
  c.grow.min_node_size = DefaultMinNodeSize(d.task());
  return c;
}

Forest::Forest(ForestConfig config, std::vector<Tree> trees,
               std::vector<std::uint32_t> in_bag, std::size_t num_rows,
               std::uint64_t fingerprint)
    : config_(std::move(config)),
      trees_(std::move(trees)),
      in_bag_(std::move(in_bag)),
      num_rows_(num_rows),
      fingerprint_(fingerprint) {
  if (trees_.empty()) throw std::invalid_argument("Forest: no trees");
  if (num_rows_ == 0 || in_bag_.size() != trees_.size() * num_rows_) {
    throw std::invalid_argument("Forest: in-bag matrix must be B x N");
  }
  const std::size_t sample = config_.sample_size.value_or(num_rows_);
  for (std::size_t b = 0; b < trees_.size(); ++b) {
    std::uint64_t total = 0;
    for (std::uint32_t c : this->in_bag(b)) total += c;
    if (total != sample) {
      throw std::invalid_argument("Forest: in-bag row " + std::to_string(b) +
                                  " does not sum to N'");
    }
    if (trees_[b].task() != trees_.front().task() ||
        trees_[b].num_classes() != trees_.front().num_classes()) {
      throw std::invalid_argument("Forest: trees disagree on the task");
    }
  }
}

std::vector<std::uint32_t> BootstrapSample(std::size_t num_rows,
                                           std::size_t sample_size, Rng& rng) {
  if (num_rows == 0 || sample_size == 0) {
    throw std::invalid_argument("BootstrapSample: N and N' must be >= 1");
  }
  std::vector<std::uint32_t> out(sample_size);
  for (auto& r : out) r = static_cast<std::uint32_t>(rng.UniformIndex(num_rows));
  std::sort(out.begin(), out.end());
  return out;
}

Forest TrainForest(const Dataset& d, const ForestConfig& config, int threads) {
  ValidateConfig(d, config);
  const auto num_trees = static_cast<std::int64_t>(config.num_trees);
  std::vector<std::optional<TreeJob>> jobs(config.num_trees);
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic) num_threads(ResolveThreads(threads))
  for (std::int64_t b = 0; b < num_trees; ++b) {
    error.Run([&] { jobs[b] = GrowOne(d, config, static_cast<std::size_t>(b)); });
  }
  error.Rethrow();
  return Assemble(d, config, jobs);
}

Forest TrainForestSerial(const Dataset& d, const ForestConfig& config) {
  ValidateConfig(d, config);
  std::vector<std::optional<TreeJob>> jobs(config.num_trees);
  for (std::size_t b = 0; b < config.num_trees; ++b) jobs[b] = GrowOne(d, config, b);
  return Assemble(d, config, jobs);
}

ForestPrediction ForestPredict(const Forest& forest, const Dataset& x, std::size_t row,
                               Heuristic policy, std::uint64_t observation_id) {
  OobAccumulator acc = MakeAccumulator(forest);
  for (std::size_t b = 0; b < forest.num_trees(); ++b) {
    const RoutingStreams streams{forest.config().seed, b, observation_id};
    acc.Add(Route(forest.tree(b), x, row, policy, streams), forest.tree(b));
  }
  const OobPrediction p = acc.Finish(forest.task());
  return {p.value, p.predicted_class, p.probabilities, p.absent_trees};
}

OobPredictionSet OobPredictAll(const Forest& forest, const Dataset& d, Heuristic policy,
                               int threads) {
  CheckFingerprint(forest, d);
  OobPredictionSet set{forest.task(), forest.num_classes(), {}};
  set.rows.resize(d.num_rows());
  const auto n = static_cast<std::int64_t>(d.num_rows());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 8) num_threads(ResolveThreads(threads))
  for (std::int64_t i = 0; i < n; ++i) {
    error.Run([&] {
      const auto row = static_cast<std::size_t>(i);
      OobAccumulator acc = MakeAccumulator(forest);
      for (std::size_t b = 0; b < forest.num_trees(); ++b) {
        if (forest.in_bag_count(b, row) != 0) continue;
        const RoutingStreams streams{forest.config().seed, b, row};
        acc.Add(Route(forest.tree(b), d, row, policy, streams), forest.tree(b));
      }
      set.rows[row] = acc.Finish(forest.task());
    });
  }
  error.Rethrow();
  return set;
}

OobPredictionSet OobPredictAllSerial(const Forest& forest, const Dataset& d,
                                     Heuristic policy) {
  CheckFingerprint(forest, d);
  std::vector<OobAccumulator> accs(d.num_rows(), MakeAccumulator(forest));
  for (std::size_t b = 0; b < forest.num_trees(); ++b) {
    for (std::size_t row = 0; row < d.num_rows(); ++row) {
      if (forest.in_bag_count(b, row) != 0) continue;
      const RoutingStreams streams{forest.config().seed, b, row};
      accs[row].Add(Route(forest.tree(b), d, row, policy, streams), forest.tree(b));
    }
  }
  OobPredictionSet set{forest.task(), forest.num_classes(), {}};
  set.rows.reserve(accs.size());
  for (const auto& acc : accs) set.rows.push_back(acc.Finish(forest.task()));
  return set;
}

std::vector<std::optional<double>> AbsenceProportions(
    std::span<const OobPredictionSet> replications) {
  if (replications.empty()) {
    throw std::invalid_argument("AbsenceProportions: need at least one replication");
  }
  const std::size_t n = replications.front().rows.size();
  std::vector<std::uint64_t> absent(n, 0);
  std::vector<std::uint64_t> oob(n, 0);
  for (const OobPredictionSet& set : replications) {
    if (set.rows.size() != n) {
      throw std::invalid_argument("AbsenceProportions: replications differ in size");
    }
    for (std::size_t i = 0; i < n; ++i) {
      absent[i] += set.rows[i].absent_trees;
      oob[i] += set.rows[i].oob_trees;
    }
  }
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (oob[i] > 0) {
      out[i] = static_cast<double>(absent[i]) / static_cast<double>(oob[i]);
    }
  }
  return out;
}

void WriteOobCsv(const OobPredictionSet& set, const ResponseSpec& response,
                 std::ostream& out) {
  out << "observation,prediction";
  if (set.task == Task::kClassification) {
    for (const auto& label : response.classes) out << ",p_" << label;
  }
  out << ",oob_trees,absent_trees\n";
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    const OobPrediction& p = set.rows[i];
    out << i << ',';
    if (!p.defined) {
      out << "NA";
      for (std::uint32_t k = 0; k < set.num_classes; ++k) out << ",NA";
    } else if (set.task == Task::kRegression) {
      out << FormatDouble(p.value);
    } else {
      out << response.classes.at(p.predicted_class);
      for (double v : p.probabilities) out << ',' << FormatDouble(v);
    }
    out << ',' << p.oob_trees << ',' << p.absent_trees << '\n';
  }
}

}  // namespace catforest
