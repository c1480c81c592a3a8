//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brt/case.hpp"
#include "brt/optimizer.hpp"
#include "brt/sparse.hpp"

namespace brt {

// Position of one tunable scalar inside the genotype.
struct GenePosition {
  int structure = 0;
  enum class Field { eud0, a, n } field = Field::eud0;
  ScalarRange range;

  std::string label(const CaseDefinition& kase) const;
};

// Tunable scalars in case order, each structure contributing eud0, a, n in
// that order. Virtual PTVs never contribute (their parameters are derived).
std::vector<GenePosition> encode(const CaseDefinition& kase);

// Writes the genotype back into a copy of the case and refreshes the virtual
// PTV linkage. Rejects length mismatches and out-of-range values.
CaseDefinition decode(std::span<const double> genotype,
                      const CaseDefinition& kase);

struct ArchiveEntry {
  std::vector<double> genotype;
  std::vector<double> objectives;
  std::vector<double> fluence;
  double log_f = 0.0;
};

bool dominates(std::span<const double> a, std::span<const double> b);

// Mutually nondominated set under componentwise <= with one strict <.
// Entries with equal objective tuples are treated as duplicates and the
// first one is kept; non-finite tuples never enter.
class ParetoArchive {
 public:
  bool insert(ArchiveEntry entry);
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<ArchiveEntry> entries_;
};

struct TunerConfig {
  int population = 150;
  int generations = 50;
  int neighborhood = 0;  // 0 selects max(2, ceil(0.13 * population))
  double sbx_eta = 20.0;
  double sbx_prob = 1.0;
  double mutation_eta = 20.0;
  double mutation_prob = -1.0;  // < 0 selects 1/genotype_length
  std::uint64_t seed = 0;
  int jobs = 1;
  bool include_default_phi = true;  // case parameters as individual 0
  // Optional early stop: archive hypervolume change below eps for
  // `stagnation_window` consecutive generations.
  std::optional<double> stagnation_eps;
  int stagnation_window = 5;
  GdConfig gd;

  void validate() const;
  int resolved_neighborhood() const;
};

struct TuneResult {
  ParetoArchive archive;
  int generations_run = 0;
  int inner_runs = 0;  // inner optimizations actually executed (cache misses)
};

using GenerationObserver =
    std::function<void(int generation, const ParetoArchive& archive)>;

// One full evaluation of a genotype: decode, inner optimization, objective
// vector. An inner-optimizer abort yields an infeasible sentinel (+inf per
// component).
struct GenotypeEvaluation {
  std::vector<double> objectives;
  std::vector<double> fluence;
  double log_f = 0.0;
  bool feasible = false;
};

GenotypeEvaluation evaluate_genotype(std::span<const double> genotype,
                                     const CaseDefinition& kase,
                                     const DepositionMatrix& matrix,
                                     const GdConfig& gd);

// Uniform weight vectors on the (m-1)-simplex; exact for m <= 2, stride
// subsampled simplex lattice for m >= 3.
std::vector<std::vector<double>> uniform_weights(int objectives, int count);

// Exact hypervolume of a minimization front against a reference point
// dominating every entry; supports 1 to 3 objectives.
double hypervolume(const std::vector<std::vector<double>>& front,
                   const std::vector<double>& reference);

// MOEA/D over the tunable gEUD parameters with weighted Tchebycheff
// decomposition, SBX + polynomial mutation, neighborhood replacement and an
// external nondominated archive. Deterministic for a fixed seed, independent
// of evaluation completion order.
TuneResult tune(const CaseDefinition& kase, const DepositionMatrix& matrix,
                const TunerConfig& config,
                const GenerationObserver& observer = {});

}  // namespace brt
