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

#include "twinarm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"

namespace twinarm {
namespace {

constexpr double kPercentiles[] = {0.0, 0.1, 0.5, 1.0, 5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 100.0};

// Linear interpolation between closest ranks.
double percentile(const std::vector<double>& sorted, double p) {
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

CalibrationReport calibrate_singularity(const RobotModel& model, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorCode::invalid_argument, "calibration needs at least one sample");
  CalibrationReport report;
  report.samples = samples;
  report.seed = seed;

  // mt19937_64 output is fixed by the standard; the distribution classes are
  // not, so the unit interval is formed by hand.
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const auto n = static_cast<int>(model.dof());
  std::vector<double> values;
  values.reserve(samples);
  JointVector q(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) {
      const auto& lim = model.joints[static_cast<std::size_t>(i)].position_limits;
      q[i] = lim.min + unit() * (lim.max - lim.min);
    }
    values.push_back(manipulability(model, Pose(), q));
  }
  std::sort(values.begin(), values.end());
  for (double p : kPercentiles) report.table.push_back({p, percentile(values, p)});

  report.suggested.m_start = percentile(values, 5.0);
  report.suggested.m_full = percentile(values, 0.5);
  if (n < 2) {
    report.warnings.push_back("degenerate model: with " + std::to_string(n) +
                              " joint(s) J^T J is 1x1 and manipulability does not indicate a singularity");
  }
  if (!(report.suggested.m_start > report.suggested.m_full)) {
    report.warnings.push_back("percentiles coincide; the proximity ramp would be a step");
  }
  return report;
}

std::string format_calibration(const CalibrationReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "samples %zu  seed %llu\n", report.samples,
                static_cast<unsigned long long>(report.seed));
  out += line;
  out += "percentile  det(J^T J)\n";
  for (const PercentileRow& row : report.table) {
    std::snprintf(line, sizeof line, "%10.1f  %.6e\n", row.percentile, row.manipulability);
    out += line;
  }
  std::snprintf(line, sizeof line, "suggested m_start %.6e (p5)\nsuggested m_full  %.6e (p0.5)\n",
                report.suggested.m_start, report.suggested.m_full);
  out += line;
  for (const std::string& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace twinarm
