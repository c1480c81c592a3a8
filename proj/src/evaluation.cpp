//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "brt/errors.hpp"

namespace brt {

DoseStats dose_stats(std::span<const double> dose,
                     std::span<const int> voxels) {
  if (voxels.empty()) {
    throw config_error("dose_stats: structure has no voxels");
  }
  DoseStats stats;
  stats.d_min = dose[voxels.front()];
  stats.d_max = dose[voxels.front()];
  double acc = 0.0;
  for (int v : voxels) {
    const double d = dose[v];
    stats.d_min = std::min(stats.d_min, d);
    stats.d_max = std::max(stats.d_max, d);
    acc += d;
  }
  stats.d_mean = acc / static_cast<double>(voxels.size());
  return stats;
}

ViolationTerms violations(const DoseStats& stats, const DoseBounds& bounds) {
  ViolationTerms terms;
  if (bounds.min && *bounds.min > stats.d_min) {
    terms.below_min = *bounds.min - stats.d_min;
  }
  if (bounds.mean_low && *bounds.mean_low > stats.d_mean) {
    terms.below_mean = *bounds.mean_low - stats.d_mean;
  }
  if (bounds.mean_high && *bounds.mean_high < stats.d_mean) {
    terms.above_mean = stats.d_mean - *bounds.mean_high;
  }
  if (bounds.max && *bounds.max < stats.d_max) {
    terms.above_max = stats.d_max - *bounds.max;
  }
  return terms;
}

double f0(std::span<const double> dose, const CaseDefinition& kase) {
  double total = 0.0;
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::virtual_ptv) continue;
    total += violations(dose_stats(dose, s.voxels), s.bounds).total();
  }
  return total;
}

double f_priority(std::span<const double> dose, const CaseDefinition& kase,
                  int p) {
  if (p < 0 || p >= static_cast<int>(kase.priorities.size())) {
    throw config_error("priority index " + std::to_string(p) +
                       " outside the configured set of " +
                       std::to_string(kase.priorities.size()));
  }
  const PriorityObjective& priority = kase.priorities[p];

  if (priority.grouping == PriorityGrouping::sum_of_means &&
      priority.metric == PriorityMetric::mean_dose) {
    double acc = 0.0;
    for (int idx : priority.structures) {
      acc += dose_stats(dose, kase.structures[idx].voxels).d_mean;
    }
    return acc;
  }

  // Union handling: the member masks pooled into one voxel multiset.
  double acc = 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (int idx : priority.structures) {
    for (int v : kase.structures[idx].voxels) {
      acc += dose[v];
      peak = std::max(peak, dose[v]);
      ++count;
    }
  }
  if (count == 0) throw config_error("priority group has no voxels");
  return priority.metric == PriorityMetric::max_dose
             ? peak
             : acc / static_cast<double>(count);
}

std::vector<double> objective_vector(std::span<const double> dose,
                                     const CaseDefinition& kase) {
  std::vector<double> objectives;
  objectives.reserve(static_cast<std::size_t>(kase.objective_count()));
  objectives.push_back(f0(dose, kase));
  for (int p = 0; p < static_cast<int>(kase.priorities.size()); ++p) {
    objectives.push_back(f_priority(dose, kase, p));
  }
  return objectives;
}

Dvh dvh(std::span<const double> dose, std::span<const int> voxels) {
  if (voxels.empty()) throw config_error("dvh: structure has no voxels");
  Dvh out;
  out.sorted_doses.reserve(voxels.size());
  for (int v : voxels) out.sorted_doses.push_back(dose[v]);
  std::sort(out.sorted_doses.begin(), out.sorted_doses.end());

  const double n = static_cast<double>(out.sorted_doses.size());
  out.curve_dose.push_back(0.0);
  out.curve_fraction.push_back(1.0);
  for (std::size_t i = 0; i < out.sorted_doses.size(); ++i) {
    if (i > 0 && out.sorted_doses[i] == out.sorted_doses[i - 1]) continue;
    out.curve_dose.push_back(out.sorted_doses[i]);
    out.curve_fraction.push_back((n - static_cast<double>(i)) / n);
  }
  out.curve_dose.push_back(out.sorted_doses.back());
  out.curve_fraction.push_back(0.0);
  return out;
}

double Dvh::fraction_at(double dose_gy) const {
  const auto it =
      std::lower_bound(sorted_doses.begin(), sorted_doses.end(), dose_gy);
  const std::size_t at_least = sorted_doses.end() - it;
  return static_cast<double>(at_least) /
         static_cast<double>(sorted_doses.size());
}

double dx_percent(std::span<const double> structure_doses, double x_percent) {
  if (structure_doses.empty()) {
    throw config_error("dx_percent: structure has no voxels");
  }
  if (!(x_percent > 0.0) || x_percent > 100.0) {
    throw config_error("dx_percent: x must lie in (0, 100]");
  }
  const std::size_t n = structure_doses.size();
  const double exact = x_percent * static_cast<double>(n) / 100.0;
  std::size_t k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);

  std::vector<double> sorted(structure_doses.begin(), structure_doses.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(),
                   std::greater<double>());
  return sorted[k - 1];
}

DoseBounds derive_ptv_bounds(double prescribed_gy) {
  if (!(prescribed_gy > 0.0)) {
    throw config_error("derive_ptv_bounds: prescription must be positive");
  }
  DoseBounds bounds;
  bounds.min = 0.90 * prescribed_gy;
  bounds.mean_low = 0.98 * prescribed_gy;
  bounds.mean_high = 1.02 * prescribed_gy;
  bounds.max = 1.10 * prescribed_gy;
  bounds.d98_min = 0.95 * prescribed_gy;
  bounds.d2_max = 1.07 * prescribed_gy;
  return bounds;
}

PlanEvaluation evaluate_plan(const CaseDefinition& kase,
                             std::span<const double> dose) {
  if (static_cast<int>(dose.size()) != kase.grid.voxel_count()) {
    throw config_error("evaluate_plan: dose vector length " +
                       std::to_string(dose.size()) +
                       " does not match the grid voxel count " +
                       std::to_string(kase.grid.voxel_count()));
  }
  PlanEvaluation evaluation;
  evaluation.case_fingerprint = case_fingerprint(kase);
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::virtual_ptv) continue;
    StructureEvaluation row;
    row.id = s.id;
    row.kind = s.kind;
    row.bounds = s.bounds;
    row.stats = dose_stats(dose, s.voxels);
    if (s.kind == StructureKind::ptv) {
      std::vector<double> doses;
      doses.reserve(s.voxels.size());
      for (int v : s.voxels) doses.push_back(dose[v]);
      row.d98 = dx_percent(doses, 98.0);
      row.d2 = dx_percent(doses, 2.0);
    }
    evaluation.structures.push_back(std::move(row));
  }
  evaluation.objectives = objective_vector(dose, kase);
  return evaluation;
}

}  // namespace brt
