// Copyright 2026 The twinarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "twinarm/builtin.hpp"

namespace twinarm {
namespace {

struct Entry {
  std::string_view name;
  std::string_view text;
};

#include "builtin_data.inc"

template <std::size_t N>
std::optional<std::string_view> lookup(const Entry (&table)[N], std::string_view name) {
  for (const Entry& e : table) {
    if (e.name == name) return e.text;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string_view> builtin_model(std::string_view name) { return lookup(k_models, name); }
std::optional<std::string_view> builtin_setup(std::string_view name) { return lookup(k_setups, name); }

std::vector<std::string_view> builtin_model_names() {
  std::vector<std::string_view> names;
  for (const Entry& e : k_models) names.push_back(e.name);
  return names;
}

}  // namespace twinarm
