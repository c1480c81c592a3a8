//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brt/case.hpp"

namespace brt {

struct DoseStats {
  double d_min = 0.0;
  double d_mean = 0.0;
  double d_max = 0.0;
};

DoseStats dose_stats(std::span<const double> dose,
                     std::span<const int> voxels);

// The four per-structure violation terms; undefined bounds contribute zero
// and a dose exactly on its bound does not violate it.
struct ViolationTerms {
  double below_min = 0.0;   // LB  - Dmin when LB  > Dmin
  double below_mean = 0.0;  // LBm - Dmean when LBm > Dmean
  double above_mean = 0.0;  // Dmean - UBm when Dmean > UBm
  double above_max = 0.0;   // Dmax - UB  when Dmax > UB

  double total() const {
    return below_min + below_mean + above_mean + above_max;
  }
};

ViolationTerms violations(const DoseStats& stats, const DoseBounds& bounds);

// Sum of all violation terms over the real structures (virtual PTVs carry no
// bounds and are excluded).
double f0(std::span<const double> dose, const CaseDefinition& kase);

// Priority objective p: mean or max dose over the priority group.
double f_priority(std::span<const double> dose, const CaseDefinition& kase,
                  int p);

// (f0, f_1, ..., f_|P|)
std::vector<double> objective_vector(std::span<const double> dose,
                                     const CaseDefinition& kase);

// Cumulative dose-volume histogram of one structure.
struct Dvh {
  std::vector<double> sorted_doses;    // ascending, one entry per voxel
  std::vector<double> curve_dose;      // step-curve samples for export
  std::vector<double> curve_fraction;  // volume fraction receiving >= dose

  // Fraction of voxels receiving at least dose_gy; 1 at zero, 0 past max.
  double fraction_at(double dose_gy) const;
};

Dvh dvh(std::span<const double> dose, std::span<const int> voxels);

// Minimal dose received by the x% most irradiated voxels: the
// ceil(x/100 * N)-th largest sample, no interpolation.
double dx_percent(std::span<const double> structure_doses, double x_percent);

// PTV bound rule: (0.90, 0.98, 1.02, 1.10) x prescribed for
// (min, mean_low, mean_high, max), plus the D98/D2 thresholds
// (0.95, 1.07) x prescribed.
DoseBounds derive_ptv_bounds(double prescribed_gy);

struct StructureEvaluation {
  std::string id;
  StructureKind kind = StructureKind::oar_parallel;
  DoseBounds bounds;
  DoseStats stats;
  std::optional<double> d98;  // PTVs only
  std::optional<double> d2;
};

struct PlanEvaluation {
  std::vector<StructureEvaluation> structures;  // real structures, case order
  std::vector<double> objectives;               // (f0, f_1, ..., f_|P|)
  std::uint64_t case_fingerprint = 0;
};

PlanEvaluation evaluate_plan(const CaseDefinition& kase,
                             std::span<const double> dose);

}  // namespace brt
