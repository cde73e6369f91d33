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

#include "catforest/split.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace catforest {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Totals of the mother node. Regression responses are centred on the mother
// mean so that SSE = sum(c^2) - sL^2/nL - sR^2/nR keeps its precision.
struct MotherTotals {
  Task task;
  std::uint32_t num_classes = 0;
  std::uint64_t n = 0;
  double mean = 0.0;
  double centered_sq = 0.0;
  double centered_sum = 0.0;
  std::vector<std::uint64_t> class_counts;

  MotherTotals(const Dataset& d, RowMultiset mother)
      : task(d.task()), num_classes(d.num_classes()), n(mother.size()) {
    if (task == Task::kRegression) {
      double sum = 0.0;
      for (std::uint32_t r : mother) sum += d.response(r);
      mean = sum / static_cast<double>(n);
      for (std::uint32_t r : mother) {
        const double c = d.response(r) - mean;
        centered_sum += c;
        centered_sq += c * c;
      }
    } else {
      class_counts.assign(num_classes, 0);
      for (std::uint32_t r : mother) ++class_counts[d.class_of(r)];
    }
  }

  double Centered(const Dataset& d, std::uint32_t row) const {
    return d.response(row) - mean;
  }
};

// Per-group statistics for a scan over groups sorted by key. Group g owns
// counts[g*K .. g*K + K) for classification.
struct Groups {
  std::vector<double> key;
  std::vector<std::uint64_t> n;
  std::vector<double> centered_sum;
  std::vector<std::uint64_t> counts;
};

double RegressionObjective(const MotherTotals& t, std::uint64_t nl, double sl) {
  const std::uint64_t nr = t.n - nl;
  const double sr = t.centered_sum - sl;
  return t.centered_sq - (sl * sl / static_cast<double>(nl) +
                          sr * sr / static_cast<double>(nr));
}

double GiniObjective(const MotherTotals& t, std::uint64_t nl,
                     std::span<const std::uint64_t> left_counts) {
  const std::uint64_t nr = t.n - nl;
  double a = 0.0;
  double b = 0.0;
  for (std::uint32_t k = 0; k < t.num_classes; ++k) {
    const double cl = static_cast<double>(left_counts[k]);
    const double cr = static_cast<double>(t.class_counts[k] - left_counts[k]);
    a += cl * cl;
    b += cr * cr;
  }
  a /= static_cast<double>(nl);
  b /= static_cast<double>(nr);
  const double n = static_cast<double>(t.n);
  return (n - (a + b)) / n;
}

struct ScanResult {
  std::size_t last_left_group = 0;
  double objective = 0.0;
  std::uint64_t left_n = 0;
};

// Scans thresholds between consecutive groups; the threshold after the last
// group is never a candidate because it empties the right daughter.
std::optional<ScanResult> ScanGroups(const Groups& g, const MotherTotals& t) {
  const std::size_t num_groups = g.n.size();
  if (num_groups < 2) return std::nullopt;
  std::optional<ScanResult> best;
  std::uint64_t nl = 0;
  double sl = 0.0;
  std::vector<std::uint64_t> cl(t.num_classes, 0);
  for (std::size_t i = 0; i + 1 < num_groups; ++i) {
    nl += g.n[i];
    double objective;
    if (t.task == Task::kRegression) {
      sl += g.centered_sum[i];
      objective = RegressionObjective(t, nl, sl);
    } else {
      for (std::uint32_t k = 0; k < t.num_classes; ++k) {
        cl[k] += g.counts[i * t.num_classes + k];
      }
      objective = GiniObjective(t, nl, cl);
    }
    if (!best || objective < best->objective) best = ScanResult{i, objective, nl};
  }
  return best;
}

// Per-level statistics of a categorical predictor in the mother node.
struct LevelStats {
  std::vector<std::uint64_t> n;
  std::vector<double> centered_sum;
  std::vector<std::uint64_t> counts;  // Q*K
};

LevelStats CollectLevelStats(const Dataset& d, RowMultiset mother, std::size_t p,
                             const MotherTotals& t) {
  const std::uint32_t q_count = d.column_schema(p).num_levels();
  const auto levels = d.level_column(p);
  LevelStats s;
  s.n.assign(q_count, 0);
  if (t.task == Task::kRegression) {
    s.centered_sum.assign(q_count, 0.0);
  } else {
    s.counts.assign(static_cast<std::size_t>(q_count) * t.num_classes, 0);
  }
  for (std::uint32_t r : mother) {
    const std::uint32_t q = levels[r];
    ++s.n[q];
    if (t.task == Task::kRegression) {
      s.centered_sum[q] += t.Centered(d, r);
    } else {
      ++s.counts[static_cast<std::size_t>(q) * t.num_classes + d.class_of(r)];
    }
  }
  return s;
}

void RequireCategorical(const Dataset& d, std::size_t p) {
  if (!d.is_categorical(p)) {
    throw std::invalid_argument("predictor '" + d.column_schema(p).name +
                                "' is not categorical");
  }
}

void RequireNonEmpty(RowMultiset mother) {
  if (mother.empty()) throw std::invalid_argument("mother node is empty");
}

// Fills sizes and impurity of a categorical candidate from its full bitmask.
CandidateSplit MakeCategorical(std::size_t p, CategoricalMethod method,
                               const LevelMask& present, const LevelMask& bitmask,
                               double impurity, std::uint64_t left_n,
                               std::uint64_t total_n) {
  CandidateSplit c;
  c.predictor = p;
  c.kind = SplitKind::kCategorical;
  c.method = method;
  c.present = present;
  c.bitmask = bitmask;
  c.left_levels = bitmask & present;
  c.impurity = impurity;
  c.left_size = left_n;
  c.right_size = total_n - left_n;
  return c;
}

// Shared by the exhaustive and random searches: objective of one encoding, or
// nullopt when a daughter has no training rows.
class EncodingEvaluator {
 public:
  EncodingEvaluator(const LevelStats& stats, const MotherTotals& totals)
      : stats_(stats), totals_(totals), left_counts_(totals.num_classes) {}

  std::optional<double> Evaluate(const LevelMask& left, std::uint64_t& left_n) {
    std::fill(left_counts_.begin(), left_counts_.end(), 0);
    left_n = 0;
    const std::uint32_t k_count = totals_.num_classes;
    for (std::uint32_t q = 0; q < left.num_levels(); ++q) {
      if (!left.test(q) || stats_.n[q] == 0) continue;
      left_n += stats_.n[q];
      for (std::uint32_t k = 0; k < k_count; ++k) {
        left_counts_[k] += stats_.counts[static_cast<std::size_t>(q) * k_count + k];
      }
    }
    if (left_n == 0 || left_n == totals_.n) return std::nullopt;
    return GiniObjective(totals_, left_n, left_counts_);
  }

 private:
  const LevelStats& stats_;
  const MotherTotals& totals_;
  std::vector<std::uint64_t> left_counts_;
};

}  // namespace

double NodeMean(std::span<const double> responses) {
  if (responses.empty()) throw std::invalid_argument("NodeMean: empty node");
  double sum = 0.0;
  for (double y : responses) sum += y;
  return sum / static_cast<double>(responses.size());
}

std::vector<double> ClassProportions(std::span<const std::uint32_t> classes,
                                     std::uint32_t num_classes) {
  if (classes.empty()) throw std::invalid_argument("ClassProportions: empty node");
  std::vector<double> pi(num_classes, 0.0);
  for (std::uint32_t k : classes) {
    if (k >= num_classes) {
      throw std::invalid_argument("ClassProportions: class index out of range");
    }
    pi[k] += 1.0;
  }
  for (double& v : pi) v /= static_cast<double>(classes.size());
  return pi;
}

double Gini(std::span<const double> proportions) {
  if (proportions.empty()) throw std::invalid_argument("Gini: empty vector");
  double total = 0.0;
  double g = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("Gini: proportion outside [0, 1]");
    }
    total += p;
    g += p * (1.0 - p);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("Gini: proportions do not sum to 1");
  }
  return g;
}

NodeSummary NodeSummary::OfResponses(std::span<const double> responses) {
  NodeSummary s;
  s.size = responses.size();
  if (responses.empty()) return s;
  const double mean = NodeMean(responses);
  for (double y : responses) s.sse += (y - mean) * (y - mean);
  return s;
}

NodeSummary NodeSummary::OfClasses(std::span<const std::uint32_t> classes,
                                   std::uint32_t num_classes) {
  NodeSummary s;
  s.size = classes.size();
  s.class_counts.assign(num_classes, 0);
  for (std::uint32_t k : classes) {
    if (k >= num_classes) throw std::invalid_argument("class index out of range");
    ++s.class_counts[k];
  }
  return s;
}

double SplitObjective(Task task, const NodeSummary& left, const NodeSummary& right) {
  if (left.size == 0 || right.size == 0) {
    throw std::invalid_argument("SplitObjective: empty daughter");
  }
  if (task == Task::kRegression) return left.sse + right.sse;
  if (left.class_counts.size() != right.class_counts.size()) {
    throw std::invalid_argument("SplitObjective: class count mismatch");
  }
  auto weighted_gini = [](const NodeSummary& s) {
    // |N| * G(N) = |N| - sum_k c_k^2 / |N|
    double sq = 0.0;
    for (std::uint64_t c : s.class_counts) {
      sq += static_cast<double>(c) * static_cast<double>(c);
    }
    const double n = static_cast<double>(s.size);
    return n - sq / n;
  };
  const double nl = static_cast<double>(left.size);
  const double nr = static_cast<double>(right.size);
  return (weighted_gini(left) + weighted_gini(right)) / (nl + nr);
}

bool CandidateSplit::operator==(const CandidateSplit& o) const {
  auto same_double = [](double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
  };
  auto same_gamma = [&](const std::optional<GammaTable>& a,
                        const std::optional<GammaTable>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    if (a->predictor != b->predictor || a->present != b->present ||
        a->absent != b->absent || a->values.size() != b->values.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a->values.size(); ++i) {
      if (!same_double(a->values[i], b->values[i])) return false;
    }
    return true;
  };
  return predictor == o.predictor && kind == o.kind && impurity == o.impurity &&
         left_size == o.left_size && right_size == o.right_size &&
         threshold == o.threshold && method == o.method && present == o.present &&
         left_levels == o.left_levels && bitmask == o.bitmask &&
         same_gamma(gamma, o.gamma) && pseudo_split == o.pseudo_split;
}

std::optional<CandidateSplit> BestOrderedSplit(const Dataset& d, RowMultiset mother,
                                               std::size_t predictor) {
  const auto values = d.ordered_column(predictor);
  RequireNonEmpty(mother);
  const MotherTotals totals(d, mother);

  std::vector<std::uint32_t> order(mother.begin(), mother.end());
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b];
  });

  Groups g;
  const std::uint32_t k_count = totals.num_classes;
  for (std::uint32_t r : order) {
    if (g.key.empty() || values[r] != g.key.back()) {
      g.key.push_back(values[r]);
      g.n.push_back(0);
      g.centered_sum.push_back(0.0);
      if (totals.task == Task::kClassification) g.counts.resize(g.counts.size() + k_count, 0);
    }
    ++g.n.back();
    if (totals.task == Task::kRegression) {
      g.centered_sum.back() += totals.Centered(d, r);
    } else {
      ++g.counts[(g.n.size() - 1) * k_count + d.class_of(r)];
    }
  }

  const auto scan = ScanGroups(g, totals);
  if (!scan) return std::nullopt;
  CandidateSplit c;
  c.predictor = predictor;
  c.kind = SplitKind::kOrdered;
  c.threshold = g.key[scan->last_left_group];
  c.impurity = scan->objective;
  c.left_size = scan->left_n;
  c.right_size = totals.n - scan->left_n;
  return c;
}

GammaTable ComputeGammaTable(const Dataset& d, RowMultiset mother,
                             std::size_t predictor) {
  RequireCategorical(d, predictor);
  if (d.task() == Task::kClassification && d.num_classes() != 2) {
    throw std::invalid_argument(
        "pseudo values are defined only for regression and binary "
        "classification");
  }
  const std::uint32_t q_count = d.column_schema(predictor).num_levels();
  const auto levels = d.level_column(predictor);
  std::vector<std::uint64_t> n(q_count, 0);
  std::vector<double> acc(q_count, 0.0);
  for (std::uint32_t r : mother) {
    const std::uint32_t q = levels[r];
    ++n[q];
    if (d.task() == Task::kRegression) {
      acc[q] += d.response(r);
    } else if (d.class_of(r) == 0) {
      acc[q] += 1.0;
    }
  }
  GammaTable t;
  t.predictor = predictor;
  t.values.assign(q_count, kNaN);
  t.present = LevelMask(q_count);
  t.absent = LevelMask(q_count);
  for (std::uint32_t q = 0; q < q_count; ++q) {
    if (n[q] > 0) {
      t.present.set(q);
      t.values[q] = acc[q] / static_cast<double>(n[q]);
    } else {
      t.absent.set(q);
    }
  }
  return t;
}

std::optional<CandidateSplit> PseudoValueSplit(const Dataset& d, RowMultiset mother,
                                               std::size_t predictor,
                                               const GammaTable& table) {
  RequireCategorical(d, predictor);
  RequireNonEmpty(mother);
  const std::uint32_t q_count = d.column_schema(predictor).num_levels();
  if (table.predictor != predictor || table.values.size() != q_count) {
    throw std::invalid_argument("PseudoValueSplit: gamma table is for another predictor");
  }
  const MotherTotals totals(d, mother);
  const LevelStats stats = CollectLevelStats(d, mother, predictor, totals);
  for (std::uint32_t q = 0; q < q_count; ++q) {
    if ((stats.n[q] > 0) != table.present.test(q) ||
        table.present.test(q) == table.absent.test(q)) {
      throw std::invalid_argument(
          "PseudoValueSplit: gamma table present/absent sets do not match the "
          "mother node");
    }
  }

  std::vector<std::uint32_t> present = table.present.levels();
  std::stable_sort(present.begin(), present.end(), [&](std::uint32_t a, std::uint32_t b) {
    return table.values[a] < table.values[b];
  });

  // One group per distinct pseudo value.
  Groups g;
  const std::uint32_t k_count = totals.num_classes;
  for (std::uint32_t q : present) {
    if (g.key.empty() || table.values[q] != g.key.back()) {
      g.key.push_back(table.values[q]);
      g.n.push_back(0);
      g.centered_sum.push_back(0.0);
      if (totals.task == Task::kClassification) g.counts.resize(g.counts.size() + k_count, 0);
    }
    g.n.back() += stats.n[q];
    if (totals.task == Task::kRegression) {
      g.centered_sum.back() += stats.centered_sum[q];
    } else {
      for (std::uint32_t k = 0; k < k_count; ++k) {
        g.counts[(g.n.size() - 1) * k_count + k] +=
            stats.counts[static_cast<std::size_t>(q) * k_count + k];
      }
    }
  }

  const auto scan = ScanGroups(g, totals);
  if (!scan) return std::nullopt;
  const double split_point = g.key[scan->last_left_group];
  LevelMask left(q_count);
  for (std::uint32_t q : table.present.levels()) {
    if (table.values[q] <= split_point) left.set(q);
  }
  CandidateSplit c = MakeCategorical(predictor, CategoricalMethod::kPseudoValue,
                                     table.present, left, scan->objective,
                                     scan->left_n, totals.n);
  c.gamma = table;
  c.pseudo_split = split_point;
  return c;
}

std::optional<CandidateSplit> ExhaustiveCategoricalSplit(const Dataset& d,
                                                         RowMultiset mother,
                                                         std::size_t predictor,
                                                         std::uint32_t max_levels) {
  RequireCategorical(d, predictor);
  RequireNonEmpty(mother);
  if (d.task() != Task::kClassification) {
    throw std::invalid_argument("exhaustive categorical search requires classification");
  }
  const std::uint32_t q_count = d.column_schema(predictor).num_levels();
  if (q_count > max_levels || q_count > 63) {
    throw std::invalid_argument(
        "predictor '" + d.column_schema(predictor).name + "' has " +
        std::to_string(q_count) + " levels, above the exhaustive limit of " +
        std::to_string(std::min<std::uint32_t>(max_levels, 63)) +
        "; use the random search");
  }
  const MotherTotals totals(d, mother);
  const LevelStats stats = CollectLevelStats(d, mother, predictor, totals);
  LevelMask present(q_count);
  for (std::uint32_t q = 0; q < q_count; ++q) {
    if (stats.n[q] > 0) present.set(q);
  }

  EncodingEvaluator eval(stats, totals);
  const std::uint64_t last = CountPartitions(q_count);
  std::optional<CandidateSplit> best;
  for (std::uint64_t code = 1; code <= last; ++code) {
    const LevelMask left = LevelMask::FromEncoding(q_count, code);
    std::uint64_t left_n = 0;
    const auto objective = eval.Evaluate(left, left_n);
    if (!objective) continue;
    if (!best || *objective < best->impurity) {
      best = MakeCategorical(predictor, CategoricalMethod::kExhaustive, present, left,
                             *objective, left_n, totals.n);
    }
  }
  return best;
}

std::optional<CandidateSplit> RandomCategoricalSplit(const Dataset& d,
                                                     RowMultiset mother,
                                                     std::size_t predictor, Rng& rng,
                                                     std::uint32_t num_candidates) {
  RequireCategorical(d, predictor);
  RequireNonEmpty(mother);
  if (d.task() != Task::kClassification) {
    throw std::invalid_argument("random categorical search requires classification");
  }
  if (num_candidates == 0) {
    throw std::invalid_argument("random categorical search needs >= 1 candidate");
  }
  const std::uint32_t q_count = d.column_schema(predictor).num_levels();
  const MotherTotals totals(d, mother);
  const LevelStats stats = CollectLevelStats(d, mother, predictor, totals);
  LevelMask present(q_count);
  for (std::uint32_t q = 0; q < q_count; ++q) {
    if (stats.n[q] > 0) present.set(q);
  }

  EncodingEvaluator eval(stats, totals);
  std::optional<CandidateSplit> best;
  for (std::uint32_t i = 0; i < num_candidates; ++i) {
    LevelMask left(q_count);
    for (std::uint32_t q = 0; q < q_count; ++q) {
      if (rng.Coin()) left.set(q);
    }
    std::uint64_t left_n = 0;
    const auto objective = eval.Evaluate(left, left_n);
    if (!objective) continue;
    if (!best || *objective < best->impurity) {
      best = MakeCategorical(predictor, CategoricalMethod::kRandom, present, left,
                             *objective, left_n, totals.n);
    }
  }
  return best;
}

std::uint64_t CountPartitions(std::uint32_t num_levels) {
  if (num_levels == 0) throw std::invalid_argument("CountPartitions: Q must be >= 1");
  if (num_levels > 64) throw std::invalid_argument("CountPartitions: Q > 64 overflows");
  return (std::uint64_t{1} << (num_levels - 1)) - 1;
}

std::vector<ImputedRoute> EmulateZeroImputedRouting(const GammaTable& table,
                                                    double pseudo_split) {
  std::vector<ImputedRoute> out;
  const Side side = 0.0 <= pseudo_split ? Side::kLeft : Side::kRight;
  for (std::uint32_t q : table.absent.levels()) out.push_back({q, side});
  return out;
}

CategoricalMethod SplitMethodConfig::Select(Task task, std::uint32_t num_classes,
                                            std::uint32_t num_levels) const {
  if (task == Task::kRegression) return CategoricalMethod::kPseudoValue;
  if (num_classes == 2) {
    return num_levels <= binary_exhaustive_max_levels ? CategoricalMethod::kExhaustive
                                                      : CategoricalMethod::kPseudoValue;
  }
  return num_levels < multiclass_exhaustive_below ? CategoricalMethod::kExhaustive
                                                  : CategoricalMethod::kRandom;
}

std::optional<CandidateSplit> BestCategoricalSplit(const Dataset& d,
                                                   RowMultiset mother,
                                                   std::size_t predictor,
                                                   const SplitMethodConfig& config,
                                                   Rng& rng) {
  const std::uint32_t q_count = d.column_schema(predictor).num_levels();
  switch (config.Select(d.task(), d.num_classes(), q_count)) {
    case CategoricalMethod::kPseudoValue:
      return PseudoValueSplit(d, mother, predictor,
                              ComputeGammaTable(d, mother, predictor));
    case CategoricalMethod::kExhaustive:
      return ExhaustiveCategoricalSplit(d, mother, predictor, config.exhaustive_limit);
    case CategoricalMethod::kRandom:
      return RandomCategoricalSplit(d, mother, predictor, rng, config.random_candidates);
  }
  return std::nullopt;
}

}  // namespace catforest
