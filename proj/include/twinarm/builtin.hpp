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

#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace twinarm {

/// Model and setup documents compiled into the library from data/.
/// Models: vx300s_right, vx300s_left, planar_2r, single_joint.
/// Setups: dual_vx300s, single_vx300s.
std::optional<std::string_view> builtin_model(std::string_view name);
std::optional<std::string_view> builtin_setup(std::string_view name);
std::vector<std::string_view> builtin_model_names();

}  // namespace twinarm
