//
// Copyright 2026 The DPSU Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dpsu/builder.hpp"
#include "dpsu/calibration.hpp"
#include "dpsu/core.hpp"
#include "dpsu/detail/rng.hpp"
#include "dpsu/policies.hpp"

namespace dpsu {

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double scale = 0.0;

  void validate() const {
    if (kind != NoiseKind::kNone && !(scale > 0.0)) {
      throw std::invalid_argument("noise scale must be positive");
    }
  }
};

// One noise draw for an item, as a pure function of (seed, item). Per-item
// streams make the release loop order-independent and parallelizable while
// staying reproducible. Laplace draws use the inverse CDF of a 53-bit
// uniform; Gaussian draws go through the normal quantile.
inline double sample_noise(const NoiseSpec& spec, const Item& item,
                           std::uint64_t seed) {
  spec.validate();
  if (spec.kind == NoiseKind::kNone) return 0.0;
  const double u = detail::unit_open_draw(seed, "noise", item);
  if (spec.kind == NoiseKind::kLaplace) {
    const double centered = u - 0.5;
    const double magnitude = -std::log1p(-2.0 * std::abs(centered));
    return centered < 0.0 ? spec.scale * magnitude * -1.0 : spec.scale * magnitude;
  }
  return spec.scale * normal_quantile(u);
}

// Releases every supported item whose noisy weight clears the threshold.
inline ItemSet release_set(const WeightedHistogram& h, const NoiseSpec& spec,
                           double rho, std::uint64_t seed) {
  ItemSet released;
  for (const auto& [item, weight] : h.weights()) {
    if (weight + sample_noise(spec, item, seed) > rho) {
      released.insert(released.end(), item);
    }
  }
  return released;
}

struct ReleaseReport {
  ItemSet released;
  Mechanism mechanism = Mechanism::kPolicyGaussian;
  PrivacyParams params;
  MechanismConfig config;
  CalibrationResult calibration;
  std::size_t histogram_support_size = 0;
  std::size_t released_size = 0;
  // True iff this run carries the (epsilon, delta) guarantee. Cleared by any
  // experimental toggle (currently: passes > 1, which has no privacy proof).
  bool is_private = true;
};

// End-to-end pipeline: calibrate, build the weighted histogram under the
// mechanism's update policy, add noise, release everything above rho.
inline ReleaseReport run_dpsu(const Database& db, const MechanismConfig& config,
                              const PrivacyParams& params) {
  if (config.mechanism == Mechanism::kGreedyDemo) {
    throw std::invalid_argument(
        "greedy-demo is a demonstration-only policy; the release pipeline refuses it");
  }
  if (config.delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  if (config.passes < 1) throw std::invalid_argument("passes must be >= 1");
  if (config.passes > 1 && !config.experimental) {
    throw std::invalid_argument(
        "passes > 1 has no privacy proof; set the experimental flag to run it");
  }
  params.validate();

  ReleaseReport report;
  report.mechanism = config.mechanism;
  report.params = params;
  report.config = config;
  report.calibration = calibrate(config.mechanism, params, config.delta0, config.alpha);

  const UpdatePolicy policy = policy_for_mechanism(
      config.mechanism, report.calibration.gamma, config.delta0);
  const WeightedHistogram h = build_histogram(db, config, policy);

  const NoiseSpec noise{report.calibration.noise_kind, report.calibration.scale};
  report.released = release_set(h, noise, report.calibration.rho, config.seed);
  report.histogram_support_size = h.support_size();
  report.released_size = report.released.size();
  report.is_private = config.passes == 1;
  return report;
}

}  // namespace dpsu
