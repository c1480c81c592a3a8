//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brt/geometry.hpp"

namespace brt {

struct ScalarRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

// gEUD parameter triple of one structure, plus which scalars the upper-level
// tuner may vary and inside which box.
struct StructureParams {
  double eud0 = 0.0;  // prescribed (PTV) or maximal (risk) uniform dose, Gy
  double a = 1.0;     // generalized-mean exponent
  double n = 1.0;     // prescription importance
  bool eud0_tunable = false;
  bool a_tunable = false;
  bool n_tunable = false;
  ScalarRange eud0_range;
  ScalarRange a_range;
  ScalarRange n_range;
};

// Optional dose bounds in Gy. min/max constrain individual voxels, the mean_*
// pair constrains the structure average, d98/d2 are PTV coverage thresholds.
struct DoseBounds {
  std::optional<double> min;
  std::optional<double> mean_low;
  std::optional<double> mean_high;
  std::optional<double> max;
  std::optional<double> d98_min;
  std::optional<double> d2_max;
};

struct Structure {
  std::string id;
  StructureKind kind = StructureKind::oar_parallel;
  std::vector<int> voxels;  // sorted, unique
  StructureParams params;
  DoseBounds bounds;
  int parent = -1;  // virtual PTV: index of the PTV it mirrors
};

enum class PriorityMetric { mean_dose, max_dose };
enum class PriorityGrouping { mean_of_union, sum_of_means };

// One protected-OAR objective f_p. Several structures may share an objective
// (paired glands); `grouping` selects how their doses combine.
struct PriorityObjective {
  std::string name;
  std::vector<int> structures;
  PriorityMetric metric = PriorityMetric::mean_dose;
  PriorityGrouping grouping = PriorityGrouping::mean_of_union;
};

// Inner-optimizer settings persisted with the case because they depend on the
// deposition matrix scaling (see GdConfig for the clinical defaults).
struct CaseOptimizerDefaults {
  int steps = 500;
  double step_size = 0.0;  // <= 0 selects the auto step step_scale/||D||_1
  double step_scale = 0.5;
  double x_max = 0.3;
  bool smoothing = true;
};

struct CaseDefinition {
  VoxelGrid grid;
  BeamLayout beams;
  std::vector<Structure> structures;
  std::vector<PriorityObjective> priorities;
  CaseOptimizerDefaults optimizer_defaults;

  int objective_count() const {
    return 1 + static_cast<int>(priorities.size());
  }
  int structure_index(const std::string& id) const;  // -1 when absent

  void validate() const;
};

// Appends one virtual PTV per PTV (same voxel set, prescription + 1 Gy,
// negated exponent, same importance) or refreshes it when already present.
// Idempotent.
CaseDefinition derive_virtual_ptvs(CaseDefinition kase);

// Re-applies the parent linkage to existing virtual PTVs in place; used after
// the tuner rewrites PTV parameters.
void refresh_virtual_ptvs(CaseDefinition& kase);

bool virtual_ptvs_derived(const CaseDefinition& kase);

// Stable fingerprint of the case identity (grid, beams, structure ids and
// voxel counts); used to reject cross-case plan comparisons.
std::uint64_t case_fingerprint(const CaseDefinition& kase);

}  // namespace brt
