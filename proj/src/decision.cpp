//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brt/errors.hpp"

namespace brt {

namespace {

// Lexicographic comparison of the objectives with index `skip` removed.
bool remaining_less(const std::vector<double>& a, const std::vector<double>& b,
                    int skip) {
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (static_cast<int>(d) == skip) continue;
    if (a[d] != b[d]) return a[d] < b[d];
  }
  return false;
}

}  // namespace

ReducedFront reduce(const ParetoArchive& archive, int k, int objective_count) {
  if (archive.empty()) {
    throw config_error("reduce: the archive is empty");
  }
  if (k < objective_count) {
    throw config_error("reduce: k = " + std::to_string(k) +
                       " is below the objective count " +
                       std::to_string(objective_count));
  }
  const std::vector<ArchiveEntry>& entries = archive.entries();
  const int n = static_cast<int>(entries.size());

  // Min-max normalization over the archive; constant objectives collapse to
  // zero so they do not contribute to distances.
  std::vector<double> lo(static_cast<std::size_t>(objective_count),
                         std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(objective_count),
                         -std::numeric_limits<double>::infinity());
  for (const ArchiveEntry& e : entries) {
    for (int d = 0; d < objective_count; ++d) {
      lo[d] = std::min(lo[d], e.objectives[d]);
      hi[d] = std::max(hi[d], e.objectives[d]);
    }
  }
  auto normalized = [&](int index, int d) {
    const double span = hi[d] - lo[d];
    return span > 0.0 ? (entries[index].objectives[d] - lo[d]) / span : 0.0;
  };
  auto distance2 = [&](int a, int b) {
    double acc = 0.0;
    for (int d = 0; d < objective_count; ++d) {
      const double delta = normalized(a, d) - normalized(b, d);
      acc += delta * delta;
    }
    return acc;
  };

  ReducedFront front;
  std::vector<bool> selected(static_cast<std::size_t>(n), false);
  auto take = [&](int index, SelectionTag tag) {
    selected[index] = true;
    front.archive_indices.push_back(index);
    front.tags.push_back(tag);
  };

  // Per-objective minimizers; ties by the lexicographically smallest
  // remaining objectives, then by insertion order.
  for (int d = 0; d < objective_count; ++d) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      const double candidate = entries[i].objectives[d];
      const double incumbent = entries[best].objectives[d];
      if (candidate < incumbent ||
          (candidate == incumbent &&
           remaining_less(entries[i].objectives, entries[best].objectives,
                          d))) {
        best = i;
      }
    }
    if (!selected[best]) take(best, SelectionTag::objective_minimizer);
  }

  // Greedy farthest-point spread until k plans or the archive runs out.
  while (static_cast<int>(front.size()) < k &&
         static_cast<int>(front.size()) < n) {
    int best = -1;
    double best_distance = -1.0;
    for (int i = 0; i < n; ++i) {
      if (selected[i]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (int s : front.archive_indices) {
        nearest = std::min(nearest, distance2(i, s));
      }
      const bool better =
          nearest > best_distance ||
          (nearest == best_distance && best >= 0 &&
           std::lexicographical_compare(entries[i].objectives.begin(),
                                        entries[i].objectives.end(),
                                        entries[best].objectives.begin(),
                                        entries[best].objectives.end()));
      if (best < 0 || better) {
        best = i;
        best_distance = nearest;
      }
    }
    take(best, SelectionTag::spread);
  }
  return front;
}

std::vector<ComparisonRow> compare(
    const std::vector<PlanEvaluation>& evaluations,
    const CaseDefinition& kase) {
  if (evaluations.empty()) {
    throw config_error("compare: need at least one plan");
  }
  const std::uint64_t fingerprint = case_fingerprint(kase);
  for (const PlanEvaluation& e : evaluations) {
    if (e.case_fingerprint != fingerprint) {
      throw config_error("compare: plans evaluated against different cases");
    }
  }

  std::vector<ComparisonRow> rows;
  const std::size_t plan_count = evaluations.size();
  for (std::size_t s = 0; s < evaluations.front().structures.size(); ++s) {
    const StructureEvaluation& reference = evaluations.front().structures[s];
    auto add_row = [&](const std::string& metric, double bound,
                       auto actual_of, auto violated_of) {
      ComparisonRow row;
      row.roi = reference.id;
      row.metric = metric;
      row.bound = bound;
      for (std::size_t p = 0; p < plan_count; ++p) {
        const StructureEvaluation& se = evaluations[p].structures[s];
        const double actual = actual_of(se);
        row.actual.push_back(actual);
        row.exceeds.push_back(violated_of(actual));
      }
      rows.push_back(std::move(row));
    };

    const DoseBounds& b = reference.bounds;
    if (b.min) {
      add_row("min>=", *b.min,
              [](const StructureEvaluation& se) { return se.stats.d_min; },
              [&](double v) { return v < *b.min; });
    }
    if (b.mean_low) {
      add_row("mean>=", *b.mean_low,
              [](const StructureEvaluation& se) { return se.stats.d_mean; },
              [&](double v) { return v < *b.mean_low; });
    }
    if (b.mean_high) {
      add_row("mean<=", *b.mean_high,
              [](const StructureEvaluation& se) { return se.stats.d_mean; },
              [&](double v) { return v > *b.mean_high; });
    }
    if (b.max) {
      add_row("max<=", *b.max,
              [](const StructureEvaluation& se) { return se.stats.d_max; },
              [&](double v) { return v > *b.max; });
    }
    if (reference.d98 && b.d98_min) {
      add_row("d98%>=", *b.d98_min,
              [](const StructureEvaluation& se) { return *se.d98; },
              [&](double v) { return v < *b.d98_min; });
    }
    if (reference.d2 && b.d2_max) {
      add_row("d2%<=", *b.d2_max,
              [](const StructureEvaluation& se) { return *se.d2; },
              [&](double v) { return v > *b.d2_max; });
    }
  }
  return rows;
}

}  // namespace brt
