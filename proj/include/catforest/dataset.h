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

#ifndef CATFOREST_DATASET_H_
#define CATFOREST_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace catforest {

enum class ColumnKind { kOrdered, kCategorical };
enum class Task { kRegression, kClassification };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kOrdered;
  // Level labels in index order; level q (1-based) is stored as q - 1.
  std::vector<std::string> levels;

  std::uint32_t num_levels() const {
    return static_cast<std::uint32_t>(levels.size());
  }
  bool operator==(const ColumnSchema&) const = default;
};

struct ResponseSpec {
  std::string name;
  Task task = Task::kRegression;
  // Class labels in index order; class k (1-based) is stored as k - 1.
  std::vector<std::string> classes;

  std::uint32_t num_classes() const {
    return static_cast<std::uint32_t>(classes.size());
  }
  bool operator==(const ResponseSpec&) const = default;
};

// Schema file descriptor: the role of every CSV field in file order plus the
// predictor and response definitions.
struct DatasetSchema {
  enum class FieldRole { kPredictor, kResponse, kIgnore };
  struct Field {
    FieldRole role = FieldRole::kPredictor;
    std::size_t predictor = 0;  // index into `predictors` when kPredictor
    std::string name;
  };

  std::vector<Field> fields;
  std::vector<ColumnSchema> predictors;
  ResponseSpec response;
  std::string missing_token = "?";
  bool header = false;

  // Parses the JSON schema format documented in README.md. Throws DataError.
  static DatasetSchema FromJson(const nlohmann::json& j);
  static DatasetSchema Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
};

class Dataset {
 public:
  struct Column {
    std::vector<double> values;         // ordered predictors
    std::vector<std::uint32_t> levels;  // categorical predictors, 0-based
  };

  // Validates every invariant (level ranges, class ranges, equal lengths,
  // N >= 1, K >= 2 for classification) and throws DataError on violation.
  Dataset(std::vector<ColumnSchema> schema, ResponseSpec response,
          std::vector<Column> columns, std::vector<double> response_values);

  std::size_t num_rows() const { return response_.size(); }
  std::size_t num_predictors() const { return schema_.size(); }
  Task task() const { return response_spec_.task; }
  std::uint32_t num_classes() const { return response_spec_.num_classes(); }

  const std::vector<ColumnSchema>& schema() const { return schema_; }
  const ColumnSchema& column_schema(std::size_t p) const { return schema_[p]; }
  const ResponseSpec& response_spec() const { return response_spec_; }
  bool is_categorical(std::size_t p) const {
    return schema_[p].kind == ColumnKind::kCategorical;
  }

  std::span<const double> ordered_column(std::size_t p) const;
  std::span<const std::uint32_t> level_column(std::size_t p) const;
  double ordered_value(std::size_t p, std::size_t row) const {
    return columns_[p].values[row];
  }
  std::uint32_t level(std::size_t p, std::size_t row) const {
    return columns_[p].levels[row];
  }

  // Numeric response, or the 0-based class index stored as a double.
  double response(std::size_t row) const { return response_[row]; }
  std::uint32_t class_of(std::size_t row) const {
    return static_cast<std::uint32_t>(response_[row]);
  }
  std::span<const double> responses() const { return response_; }

  // Stable FNV-1a digest of schema and contents.
  std::uint64_t Fingerprint() const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<ColumnSchema> schema_;
  ResponseSpec response_spec_;
  std::vector<Column> columns_;
  std::vector<double> response_;
};

struct IngestResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

// Reads comma-separated records. Rows containing the schema's missing token in
// any field are dropped; categorical labels map to levels by schema order.
// Unknown labels and non-numeric ordered values throw DataError naming the
// column and the 1-based file line.
IngestResult IngestCsv(std::istream& in, const DatasetSchema& schema);
IngestResult IngestCsv(const std::filesystem::path& path,
                       const DatasetSchema& schema);

// Writes `d` as CSV with a header line, predictors then response, using level
// and class labels. Pair with OneHotSchema / SchemaFor to read it back.
void WriteCsv(const Dataset& d, std::ostream& out);

// Schema descriptor matching the layout produced by WriteCsv.
DatasetSchema SchemaFor(const Dataset& d);

// Replaces every categorical predictor with Q ordered 0/1 dummy columns named
// "<name>=<label>" (full encoding). Ordered predictors and the response pass
// through unchanged.
Dataset OneHotTransform(const Dataset& d);

// Per-level counts of `rows` (a multiset of row indices) for categorical
// predictor `p`. Throws std::invalid_argument for an ordered predictor.
std::vector<std::uint64_t> LevelCounts(const Dataset& d, std::size_t p,
                                       std::span<const std::uint32_t> rows);

}  // namespace catforest

#endif  // CATFOREST_DATASET_H_
