//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brt/case.hpp"
#include "brt/decision.hpp"
#include "brt/evaluation.hpp"
#include "brt/phantom.hpp"
#include "brt/sparse.hpp"
#include "brt/tuner.hpp"

namespace brt::io {

inline constexpr const char* kVersion = "0.1.0";

// All floating-point CSV output uses 17 significant digits so files
// round-trip exactly.
std::string format_double(double value);

std::uint64_t fnv1a(std::string_view text);

// --- JSON documents ------------------------------------------------------

PhantomSpec read_phantom_spec(const std::filesystem::path& path);
std::string phantom_spec_to_json(const PhantomSpec& spec);

CaseDefinition case_from_json(const std::string& text);
std::string case_to_json(const CaseDefinition& kase);

// Partial parameter assignment: tunable scalars only, validated against the
// declared ranges. Returns the case with the assignment applied and virtual
// PTVs refreshed.
CaseDefinition apply_phi_json(const CaseDefinition& kase,
                              const std::string& phi_text);

// --- CSV artifacts -------------------------------------------------------

// First line carries `rows,cols,nnz`; triplet lines follow as row,col,value.
void write_deposition_csv(const std::filesystem::path& path,
                          const DepositionMatrix& matrix);
DepositionMatrix read_deposition_csv(const std::filesystem::path& path);

// beam,row,col,value with one line per beamlet.
void write_fluence_csv(const std::filesystem::path& path,
                       const BeamLayout& beams,
                       std::span<const double> fluence);
std::vector<double> read_fluence_csv(const std::filesystem::path& path,
                                     const BeamLayout& beams);

void write_evaluation_csv(const std::filesystem::path& path,
                          const PlanEvaluation& evaluation);

void write_dvh_csv(const std::filesystem::path& path,
                   const CaseDefinition& kase, std::span<const double> dose);

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<ComparisonRow>& rows,
                          const std::vector<std::string>& plan_names);

void write_archive_csv(const std::filesystem::path& path,
                       const ParetoArchive& archive, int objective_count,
                       int genotype_length);

// --- SVG charts (byte-stable for fixed inputs) ----------------------------

void write_dvh_svg(const std::filesystem::path& path,
                   const CaseDefinition& kase, std::span<const double> dose);

void write_slice_svg(const std::filesystem::path& path,
                     const CaseDefinition& kase, std::span<const double> dose,
                     int z_index);

// --- Run manifests -------------------------------------------------------

struct RunManifest {
  std::string stage;
  std::string config_json;             // resolved configuration
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;
  double total_ms = 0.0;               // volatile; excluded from idempotence
};

void write_manifest(const std::filesystem::path& dir,
                    const RunManifest& manifest,
                    const std::string& filename = "run_manifest.json");
RunManifest read_manifest(const std::filesystem::path& dir,
                          const std::string& filename = "run_manifest.json");

// --- Pipeline stages -----------------------------------------------------

// Optional command-line overrides of the case optimizer defaults.
struct GdOverrides {
  std::optional<int> steps;
  std::optional<double> step_size;
  std::optional<double> step_scale;
  std::optional<double> x_max;
  std::optional<bool> smoothing;
  std::optional<bool> record_trajectory;

  GdConfig resolve(const CaseDefinition& kase) const;
};

struct TunerOverrides {
  std::optional<int> population;
  std::optional<int> generations;
  std::optional<int> neighborhood;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;  // otherwise BILEVEL_RT_THREADS, then 1
  std::optional<double> stagnation_eps;
  GdOverrides gd;

  TunerConfig resolve(const CaseDefinition& kase) const;
};

void run_phantom_stage(const std::filesystem::path& spec_path,
                       const std::filesystem::path& out_dir);

struct LoadedCase {
  CaseDefinition kase;  // virtual PTVs derived
  DepositionMatrix matrix;
  std::filesystem::path dir;
};

LoadedCase load_case(const std::filesystem::path& case_dir);

void run_optimize_stage(const LoadedCase& loaded,
                        const std::filesystem::path& phi_path,  // may be empty
                        const GdOverrides& overrides,
                        const std::filesystem::path& out_dir);

void run_tune_stage(const LoadedCase& loaded, const TunerOverrides& overrides,
                    const std::filesystem::path& out_dir);

struct LoadedArchive {
  ParetoArchive archive;
  std::filesystem::path case_dir;
};

LoadedArchive load_archive(const std::filesystem::path& archive_dir);

void run_reduce_stage(const std::filesystem::path& archive_dir, int k,
                      const std::filesystem::path& out_dir);

// Renders DVH and slice charts (plus the comparison table for fronts) into
// the plan or front directory produced by the stages above.
void run_report_stage(const std::filesystem::path& target_dir, int z_index);

}  // namespace brt::io
