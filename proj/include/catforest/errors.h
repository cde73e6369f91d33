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

#ifndef CATFOREST_ERRORS_H_
#define CATFOREST_ERRORS_H_

#include <stdexcept>
#include <string>

namespace catforest {

// Malformed or inconsistent input: CSV contents, schema files, model dumps,
// experiment configs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation was asked for something it cannot produce (for example a
// relative metric against a zero baseline).
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace catforest

#endif  // CATFOREST_ERRORS_H_
