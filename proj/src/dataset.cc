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

#include "catforest/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "catforest/errors.h"
#include "catforest/util.h"

namespace catforest {
namespace {

using json = nlohmann::json;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV record. Double-quoted fields may contain commas; "" inside a
// quoted field is a literal quote.
std::vector<std::string> SplitRecord(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(Trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(Trim(field));
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() &&
         std::isfinite(out);
}

void CheckUnique(const std::vector<std::string>& labels, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw DataError(what + ": duplicate label '" + l + "'");
    }
  }
}

}  // namespace

DatasetSchema DatasetSchema::FromJson(const json& j) {
  DatasetSchema schema;
  try {
    schema.missing_token = j.value("missing_token", std::string("?"));
    schema.header = j.value("header", false);
    const json& resp = j.at("response");
    const std::string resp_kind = resp.at("kind").get<std::string>();
    if (resp_kind == "numeric") {
      schema.response.task = Task::kRegression;
    } else if (resp_kind == "class") {
      schema.response.task = Task::kClassification;
      schema.response.classes = resp.at("classes").get<std::vector<std::string>>();
    } else {
      throw DataError("schema: response kind must be 'numeric' or 'class', got '" +
                      resp_kind + "'");
    }
    bool have_response = false;
    for (const json& col : j.at("columns")) {
      Field field;
      field.name = col.at("name").get<std::string>();
      const std::string kind = col.at("kind").get<std::string>();
      if (kind == "ordered" || kind == "categorical") {
        ColumnSchema cs;
        cs.name = field.name;
        if (kind == "categorical") {
          cs.kind = ColumnKind::kCategorical;
          cs.levels = col.at("levels").get<std::vector<std::string>>();
          if (cs.levels.empty()) {
            throw DataError("schema: categorical column '" + cs.name +
                            "' needs at least one level");
          }
          CheckUnique(cs.levels, "schema column '" + cs.name + "'");
        }
        field.role = FieldRole::kPredictor;
        field.predictor = schema.predictors.size();
        schema.predictors.push_back(std::move(cs));
      } else if (kind == "response") {
        if (have_response) throw DataError("schema: more than one response column");
        have_response = true;
        field.role = FieldRole::kResponse;
        schema.response.name = field.name;
      } else if (kind == "ignore") {
        field.role = FieldRole::kIgnore;
      } else {
        throw DataError("schema: unknown column kind '" + kind + "' for '" +
                        field.name + "'");
      }
      schema.fields.push_back(std::move(field));
    }
    if (!have_response) throw DataError("schema: no column has kind 'response'");
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  if (schema.response.task == Task::kClassification) {
    if (schema.response.classes.size() < 2) {
      throw DataError("schema: classification needs at least 2 classes");
    }
    CheckUnique(schema.response.classes, "schema response");
  }
  return schema;
}

DatasetSchema DatasetSchema::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("schema " + path.string() + ": " + e.what());
  }
  return FromJson(j);
}

json DatasetSchema::ToJson() const {
  json cols = json::array();
  for (const Field& f : fields) {
    json c;
    c["name"] = f.name;
    switch (f.role) {
      case FieldRole::kPredictor: {
        const ColumnSchema& cs = predictors[f.predictor];
        if (cs.kind == ColumnKind::kCategorical) {
          c["kind"] = "categorical";
          c["levels"] = cs.levels;
        } else {
          c["kind"] = "ordered";
        }
        break;
      }
      case FieldRole::kResponse:
        c["kind"] = "response";
        break;
      case FieldRole::kIgnore:
        c["kind"] = "ignore";
        break;
    }
    cols.push_back(std::move(c));
  }
  json resp;
  if (response.task == Task::kClassification) {
    resp["kind"] = "class";
    resp["classes"] = response.classes;
  } else {
    resp["kind"] = "numeric";
  }
  return json{{"missing_token", missing_token},
              {"header", header},
              {"columns", std::move(cols)},
              {"response", std::move(resp)}};
}

Dataset::Dataset(std::vector<ColumnSchema> schema, ResponseSpec response,
                 std::vector<Column> columns, std::vector<double> response_values)
    : schema_(std::move(schema)),
      response_spec_(std::move(response)),
      columns_(std::move(columns)),
      response_(std::move(response_values)) {
  if (response_.empty()) throw DataError("dataset has no rows");
  if (columns_.size() != schema_.size()) {
    throw DataError("dataset: column count does not match schema");
  }
  if (response_spec_.task == Task::kClassification) {
    if (response_spec_.num_classes() < 2) {
      throw DataError("dataset: classification needs K >= 2");
    }
    for (double y : response_) {
      if (y < 0 || y >= response_spec_.num_classes() || y != std::floor(y)) {
        throw DataError("dataset: class index out of range");
      }
    }
  }
  for (std::size_t p = 0; p < schema_.size(); ++p) {
    const ColumnSchema& cs = schema_[p];
    const Column& col = columns_[p];
    if (cs.kind == ColumnKind::kCategorical) {
      if (cs.levels.empty()) {
        throw DataError("dataset: categorical column '" + cs.name + "' has Q = 0");
      }
      if (col.levels.size() != response_.size()) {
        throw DataError("dataset: column '" + cs.name + "' has wrong length");
      }
      for (std::uint32_t l : col.levels) {
        if (l >= cs.num_levels()) {
          throw DataError("dataset: level index out of range in '" + cs.name + "'");
        }
      }
    } else if (col.values.size() != response_.size()) {
      throw DataError("dataset: column '" + cs.name + "' has wrong length");
    }
  }
}

std::span<const double> Dataset::ordered_column(std::size_t p) const {
  if (is_categorical(p)) {
    throw std::invalid_argument("predictor '" + schema_[p].name + "' is categorical");
  }
  return columns_[p].values;
}

std::span<const std::uint32_t> Dataset::level_column(std::size_t p) const {
  if (!is_categorical(p)) {
    throw std::invalid_argument("predictor '" + schema_[p].name + "' is ordered");
  }
  return columns_[p].levels;
}

std::uint64_t Dataset::Fingerprint() const {
  Fnv1a h;
  h.U64(schema_.size());
  for (std::size_t p = 0; p < schema_.size(); ++p) {
    const ColumnSchema& cs = schema_[p];
    h.Str(cs.name);
    h.U64(cs.kind == ColumnKind::kCategorical ? 1 : 0);
    h.U64(cs.levels.size());
    for (const auto& l : cs.levels) h.Str(l);
    if (cs.kind == ColumnKind::kCategorical) {
      for (std::uint32_t l : columns_[p].levels) h.U64(l);
    } else {
      for (double v : columns_[p].values) h.F64(v);
    }
  }
  h.U64(response_spec_.task == Task::kClassification ? 1 : 0);
  for (const auto& c : response_spec_.classes) h.Str(c);
  for (double y : response_) h.F64(y);
  return h.digest();
}

bool Dataset::operator==(const Dataset& other) const {
  if (schema_ != other.schema_ || response_spec_ != other.response_spec_ ||
      response_ != other.response_) {
    return false;
  }
  for (std::size_t p = 0; p < columns_.size(); ++p) {
    if (columns_[p].values != other.columns_[p].values ||
        columns_[p].levels != other.columns_[p].levels) {
      return false;
    }
  }
  return true;
}

IngestResult IngestCsv(std::istream& in, const DatasetSchema& schema) {
  const std::size_t num_fields = schema.fields.size();
  std::vector<std::unordered_map<std::string, std::uint32_t>> level_index(
      schema.predictors.size());
  for (std::size_t p = 0; p < schema.predictors.size(); ++p) {
    const auto& levels = schema.predictors[p].levels;
    for (std::uint32_t q = 0; q < levels.size(); ++q) level_index[p][levels[q]] = q;
  }
  std::unordered_map<std::string, std::uint32_t> class_index;
  for (std::uint32_t k = 0; k < schema.response.classes.size(); ++k) {
    class_index[schema.response.classes[k]] = k;
  }

  std::vector<Dataset::Column> columns(schema.predictors.size());
  std::vector<double> response;
  std::size_t dropped = 0;
  std::size_t line_no = 0;
  std::string line;
  bool skip_header = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    const std::vector<std::string> cells = SplitRecord(line);
    if (cells.size() != num_fields) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(num_fields) + " fields, found " +
                      std::to_string(cells.size()));
    }
    bool missing = false;
    for (const auto& c : cells) {
      if (c == schema.missing_token) missing = true;
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t f = 0; f < num_fields; ++f) {
      const auto& field = schema.fields[f];
      const std::string& cell = cells[f];
      auto where = [&] {
        return "column '" + field.name + "', line " + std::to_string(line_no);
      };
      switch (field.role) {
        case DatasetSchema::FieldRole::kIgnore:
          break;
        case DatasetSchema::FieldRole::kPredictor: {
          const ColumnSchema& cs = schema.predictors[field.predictor];
          if (cs.kind == ColumnKind::kCategorical) {
            auto it = level_index[field.predictor].find(cell);
            if (it == level_index[field.predictor].end()) {
              throw DataError("unknown level '" + cell + "' in " + where());
            }
            columns[field.predictor].levels.push_back(it->second);
          } else {
            double v;
            if (!ParseDouble(cell, v)) {
              throw DataError("non-numeric value '" + cell + "' in " + where());
            }
            columns[field.predictor].values.push_back(v);
          }
          break;
        }
        case DatasetSchema::FieldRole::kResponse: {
          if (schema.response.task == Task::kClassification) {
            auto it = class_index.find(cell);
            if (it == class_index.end()) {
              throw DataError("unknown class '" + cell + "' in " + where());
            }
            response.push_back(it->second);
          } else {
            double v;
            if (!ParseDouble(cell, v)) {
              throw DataError("non-numeric response '" + cell + "' in " + where());
            }
            response.push_back(v);
          }
          break;
        }
      }
    }
  }
  if (response.empty()) throw DataError("no complete rows in input");
  return IngestResult{Dataset(schema.predictors, schema.response,
                              std::move(columns), std::move(response)),
                      dropped};
}

IngestResult IngestCsv(const std::filesystem::path& path,
                       const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  return IngestCsv(in, schema);
}

namespace {

std::string Quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void WriteCsv(const Dataset& d, std::ostream& out) {
  for (std::size_t p = 0; p < d.num_predictors(); ++p) {
    out << Quote(d.column_schema(p).name) << ',';
  }
  out << Quote(d.response_spec().name.empty() ? "response" : d.response_spec().name)
      << '\n';
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    for (std::size_t p = 0; p < d.num_predictors(); ++p) {
      if (d.is_categorical(p)) {
        out << Quote(d.column_schema(p).levels[d.level(p, n)]);
      } else {
        out << FormatDouble(d.ordered_value(p, n));
      }
      out << ',';
    }
    if (d.task() == Task::kClassification) {
      out << Quote(d.response_spec().classes[d.class_of(n)]);
    } else {
      out << FormatDouble(d.response(n));
    }
    out << '\n';
  }
}

DatasetSchema SchemaFor(const Dataset& d) {
  DatasetSchema schema;
  schema.header = true;
  schema.predictors = d.schema();
  schema.response = d.response_spec();
  if (schema.response.name.empty()) schema.response.name = "response";
  for (std::size_t p = 0; p < d.num_predictors(); ++p) {
    schema.fields.push_back({DatasetSchema::FieldRole::kPredictor, p,
                             d.column_schema(p).name});
  }
  schema.fields.push_back(
      {DatasetSchema::FieldRole::kResponse, 0, schema.response.name});
  return schema;
}

Dataset OneHotTransform(const Dataset& d) {
  std::vector<ColumnSchema> schema;
  std::vector<Dataset::Column> columns;
  for (std::size_t p = 0; p < d.num_predictors(); ++p) {
    const ColumnSchema& cs = d.column_schema(p);
    if (!d.is_categorical(p)) {
      schema.push_back(cs);
      columns.push_back({std::vector<double>(d.ordered_column(p).begin(),
                                             d.ordered_column(p).end()),
                         {}});
      continue;
    }
    const auto levels = d.level_column(p);
    for (std::uint32_t q = 0; q < cs.num_levels(); ++q) {
      schema.push_back({cs.name + "=" + cs.levels[q], ColumnKind::kOrdered, {}});
      Dataset::Column dummy;
      dummy.values.reserve(levels.size());
      for (std::uint32_t l : levels) dummy.values.push_back(l == q ? 1.0 : 0.0);
      columns.push_back(std::move(dummy));
    }
  }
  return Dataset(std::move(schema), d.response_spec(), std::move(columns),
                 std::vector<double>(d.responses().begin(), d.responses().end()));
}

std::vector<std::uint64_t> LevelCounts(const Dataset& d, std::size_t p,
                                       std::span<const std::uint32_t> rows) {
  const auto levels = d.level_column(p);
  std::vector<std::uint64_t> counts(d.column_schema(p).num_levels(), 0);
  for (std::uint32_t r : rows) ++counts[levels[r]];
  return counts;
}

}  // namespace catforest
