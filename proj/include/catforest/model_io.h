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

// Model dumps. A forest is a directory holding manifest.json and one
// tree_<b>.json per tree. Doubles are written in shortest round-trip form, so
// a reload reproduces every tree bit for bit (checked against the stored
// structure hash).

#ifndef CATFOREST_MODEL_IO_H_
#define CATFOREST_MODEL_IO_H_

#include <filesystem>
#include <string_view>

#include "catforest/dataset.h"
#include "catforest/forest.h"
#include "catforest/tree.h"
#include "json.hpp"

namespace catforest {

inline constexpr int kModelFormatVersion = 1;

std::string_view MethodName(CategoricalMethod m);
CategoricalMethod ParseMethod(std::string_view token);

nlohmann::json TreeToJson(const Tree& tree);
// Throws DataError on malformed input.
Tree TreeFromJson(const nlohmann::json& j);

nlohmann::json ForestConfigToJson(const ForestConfig& config);
ForestConfig ForestConfigFromJson(const nlohmann::json& j);

// `schema` is the ingestion schema of the training data; it is stored so that
// new data can be read for prediction.
void SaveForest(const Forest& forest, const DatasetSchema& schema,
                const std::filesystem::path& dir);

struct LoadedModel {
  Forest forest;
  DatasetSchema schema;
};

// Throws DataError for a missing or inconsistent dump.
LoadedModel LoadForest(const std::filesystem::path& dir);

}  // namespace catforest

#endif  // CATFOREST_MODEL_IO_H_
