//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brt/case.hpp"
#include "brt/dose_model.hpp"

namespace brt {

// Lower-level optimizer configuration. The stock values reproduce the
// published clinical configuration (20000 steps, 2e-7 step, 0.3 cap, 3x3
// smoothing); desk-scale cases carry their own defaults because both the step
// and the cap depend on the deposition matrix scaling.
struct GdConfig {
  enum class Init { uniform_half_max, zeros, seeded_random };

  int steps = 20000;
  // Explicit step size; nullopt selects step_scale / ||D||_1. A zero step is
  // legal and leaves the start point untouched.
  std::optional<double> step_size = 2e-7;
  double step_scale = 0.5;
  double x_max = 0.3;
  bool smoothing = true;
  std::array<double, 9> kernel{1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9,
                               1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9};
  Init init = Init::uniform_half_max;
  std::uint64_t init_seed = 0;
  bool record_trajectory = false;

  void validate() const;

  static GdConfig from_case_defaults(const CaseOptimizerDefaults& defaults);
};

struct PlanResult {
  std::vector<double> fluence;     // x*, elementwise within [0, x_max]
  double log_f = 0.0;              // log F at x*
  double step_size_used = 0.0;
  // log F at every iterate (length steps + 1) when recording is on.
  std::vector<double> trajectory;
};

// 3x3 convolution with edge renormalization: taps falling outside the grid
// are dropped and the surviving weights rescaled to sum one. Preserves
// constants and never raises the maximum.
std::vector<double> smooth_beam(std::span<const double> grid, int rows,
                                int cols, const std::array<double, 9>& kernel);

// Projected gradient ascent of log F. Per iteration: gradient step, clip to
// [0, x_max], optional per-beam smoothing, clip again. Deterministic for
// fixed inputs. Requires virtual PTVs to be derived.
PlanResult optimize(const CaseDefinition& kase, const DepositionMatrix& matrix,
                    const GdConfig& config);

}  // namespace brt
