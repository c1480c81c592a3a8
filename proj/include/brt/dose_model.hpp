//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <span>
#include <vector>

#include "brt/case.hpp"
#include "brt/sparse.hpp"

namespace brt {

// Doses are clamped to this floor before fractional or negative powers; a
// negative exponent is singular at zero dose.
inline constexpr double kDoseFloorGy = 1e-6;

struct GeudValue {
  double value = 0.0;
  double log_value = 0.0;
};

// Generalized power mean of the structure doses with exponent a, evaluated in
// the log domain with a max shift so exponents up to |a| = 100 neither
// overflow nor lose the result.
GeudValue geud(std::span<const double> structure_doses, double a);

struct ObjectiveValue {
  double f = 0.0;      // product objective; exp(log_f), may underflow to 0
  double log_f = 0.0;  // finite whenever doses are clamped to the floor
  // One factor per case structure, in case order: log of the PTV coverage
  // factor or of the risk penalty factor.
  std::vector<double> structure_log_factors;
};

// Product objective over all structures: PTVs contribute coverage factors,
// everything else (OARs, virtual PTVs, normal tissue) risk factors.
ObjectiveValue objective_logf(const CaseDefinition& kase,
                              std::span<const double> dose);

ObjectiveValue objective_logf_fluence(const CaseDefinition& kase,
                                      const DepositionMatrix& matrix,
                                      std::span<const double> fluence);

// Analytic gradient of log F with respect to the beamlet fluence; returns the
// log objective as a byproduct. Throws numeric_error naming the offending
// structure if any contribution is non-finite.
double grad_logf(const CaseDefinition& kase, const DepositionMatrix& matrix,
                 std::span<const double> fluence, std::span<double> grad_out);

}  // namespace brt
