//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brt/errors.hpp"
#include "brt/rng.hpp"

namespace brt {

void GdConfig::validate() const {
  if (steps < 1) throw config_error("gd config: steps must be >= 1");
  if (step_size) {
    if (!(*step_size >= 0.0) || !std::isfinite(*step_size)) {
      throw config_error("gd config: step size must be finite and >= 0");
    }
  } else if (!(step_scale > 0.0)) {
    throw config_error("gd config: step scale must be positive");
  }
  if (!(x_max > 0.0)) throw config_error("gd config: x_max must be positive");
  double kernel_sum = 0.0;
  for (double w : kernel) {
    if (w < 0.0) throw config_error("gd config: kernel weights must be nonnegative");
    kernel_sum += w;
  }
  if (std::abs(kernel_sum - 1.0) > 1e-9) {
    throw config_error("gd config: kernel weights must sum to 1");
  }
}

GdConfig GdConfig::from_case_defaults(const CaseOptimizerDefaults& defaults) {
  GdConfig config;
  config.steps = defaults.steps;
  if (defaults.step_size > 0.0) {
    config.step_size = defaults.step_size;
  } else {
    config.step_size.reset();
  }
  config.step_scale = defaults.step_scale;
  config.x_max = defaults.x_max;
  config.smoothing = defaults.smoothing;
  return config;
}

std::vector<double> smooth_beam(std::span<const double> grid, int rows,
                                int cols,
                                const std::array<double, 9>& kernel) {
  if (rows < 1 || cols < 1 ||
      static_cast<std::size_t>(rows) * cols != grid.size()) {
    throw config_error("smooth_beam: grid dimensions do not match data");
  }
  std::vector<double> out(grid.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      double weight_sum = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= rows) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= cols) continue;
          const double w = kernel[(dr + 1) * 3 + (dc + 1)];
          acc += w * grid[rr * cols + cc];
          weight_sum += w;
        }
      }
      out[r * cols + c] =
          weight_sum > 0.0 ? acc / weight_sum : grid[r * cols + c];
    }
  }
  return out;
}

PlanResult optimize(const CaseDefinition& kase, const DepositionMatrix& matrix,
                    const GdConfig& config) {
  config.validate();
  if (!virtual_ptvs_derived(kase)) {
    throw config_error("optimize: case is missing derived virtual PTVs");
  }
  if (kase.beams.beamlet_count() != matrix.cols()) {
    throw config_error("optimize: beam layout has " +
                       std::to_string(kase.beams.beamlet_count()) +
                       " beamlets but the matrix has " +
                       std::to_string(matrix.cols()) + " columns");
  }

  double step = 0.0;
  if (config.step_size) {
    step = *config.step_size;
  } else {
    const double norm = matrix.max_column_abs_sum();
    if (!(norm > 0.0)) {
      throw config_error("optimize: deposition matrix has no entries");
    }
    step = config.step_scale / norm;
  }

  const int beamlets = matrix.cols();
  std::vector<double> x(static_cast<std::size_t>(beamlets));
  switch (config.init) {
    case GdConfig::Init::uniform_half_max:
      std::fill(x.begin(), x.end(), 0.5 * config.x_max);
      break;
    case GdConfig::Init::zeros:
      std::fill(x.begin(), x.end(), 0.0);
      break;
    case GdConfig::Init::seeded_random: {
      Rng rng(config.init_seed);
      for (double& v : x) v = rng.uniform(0.0, config.x_max);
      break;
    }
  }

  PlanResult result;
  result.step_size_used = step;
  if (config.record_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(config.steps) + 1);
  }

  std::vector<double> grad(static_cast<std::size_t>(beamlets));
  auto clip = [&](std::vector<double>& values) {
    for (double& v : values) v = std::clamp(v, 0.0, config.x_max);
  };
  clip(x);

  for (int k = 0; k < config.steps; ++k) {
    double log_f = 0.0;
    try {
      log_f = grad_logf(kase, matrix, x, grad);
    } catch (const numeric_error& e) {
      throw numeric_error("optimize aborted at iteration " +
                          std::to_string(k) + ": " + e.what());
    }
    if (config.record_trajectory) result.trajectory.push_back(log_f);

    for (int b = 0; b < beamlets; ++b) x[b] += step * grad[b];
    clip(x);

    if (config.smoothing) {
      for (std::size_t beam = 0; beam < kase.beams.beams.size(); ++beam) {
        const Beam& geometry = kase.beams.beams[beam];
        const int offset = kase.beams.beam_offset(static_cast<int>(beam));
        const std::span<double> slice(x.data() + offset,
                                      static_cast<std::size_t>(
                                          geometry.beamlet_count()));
        const std::vector<double> smoothed =
            smooth_beam(slice, geometry.beamlets_v, geometry.beamlets_u,
                        config.kernel);
        std::copy(smoothed.begin(), smoothed.end(), slice.begin());
      }
      clip(x);
    }
  }

  result.log_f = objective_logf_fluence(kase, matrix, x).log_f;
  if (config.record_trajectory) result.trajectory.push_back(result.log_f);
  result.fluence = std::move(x);
  return result;
}

}  // namespace brt
