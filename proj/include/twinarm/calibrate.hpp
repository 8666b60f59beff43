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

#include <cstdint>
#include <string>
#include <vector>

#include "twinarm/constraints.hpp"
#include "twinarm/model.hpp"

namespace twinarm {

struct PercentileRow {
  double percentile = 0.0;
  double manipulability = 0.0;
};

struct CalibrationReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<PercentileRow> table;
  /// m_start at the 5th percentile, m_full at the 0.5th.
  SingularityParams suggested;
  std::vector<std::string> warnings;
};

/// Samples uniformly inside the joint limits (seeded, platform independent)
/// and summarizes the manipulability distribution.
CalibrationReport calibrate_singularity(const RobotModel& model, std::size_t samples, std::uint64_t seed = 1);

/// Fixed-format text table; identical for identical inputs.
std::string format_calibration(const CalibrationReport& report);

}  // namespace twinarm
