//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

#include "brt/evaluation.hpp"
#include "brt/tuner.hpp"

namespace brt {

enum class SelectionTag { objective_minimizer, spread };

struct ReducedFront {
  std::vector<int> archive_indices;  // selection order
  std::vector<SelectionTag> tags;

  std::size_t size() const { return archive_indices.size(); }
};

// Per-objective minimizers first (ties by the lexicographically smallest
// remaining objectives, then insertion order), then greedy farthest-point
// selection in min-max normalized objective space until k plans. Plans with
// small positive f0 stay eligible; k below the objective count is rejected.
ReducedFront reduce(const ParetoArchive& archive, int k, int objective_count);

struct ComparisonRow {
  std::string roi;
  std::string metric;  // bound kind with direction, e.g. "mean<="
  double bound = 0.0;
  std::vector<double> actual;  // one per plan
  std::vector<bool> exceeds;   // flagged iff the bound inequality is violated
};

// Side-by-side table over the defined bounds of every real structure, plus
// the D98/D2 rows for PTVs. All evaluations must come from the same case.
std::vector<ComparisonRow> compare(
    const std::vector<PlanEvaluation>& evaluations,
    const CaseDefinition& kase);

}  // namespace brt
