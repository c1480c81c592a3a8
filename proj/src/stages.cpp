//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "brt/decision.hpp"
#include "brt/errors.hpp"
#include "brt/io.hpp"
#include "brt/optimizer.hpp"
#include "brt/phantom.hpp"
#include "brt/tuner.hpp"

namespace brt::io {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw config_error("cannot create directory '" + dir.string() + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw missing_artifact_error("expected file '" + path.string() +
                                 "' is missing");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write '" + path.string() + "'");
  out << text;
}

json gd_config_to_json(const GdConfig& gd) {
  json j;
  j["steps"] = gd.steps;
  if (gd.step_size) {
    j["step_size"] = *gd.step_size;
  } else {
    j["step_size"] = nullptr;
    j["step_scale"] = gd.step_scale;
  }
  j["x_max"] = gd.x_max;
  j["smoothing"] = gd.smoothing;
  j["kernel"] = gd.kernel;
  j["record_trajectory"] = gd.record_trajectory;
  return j;
}

json plan_to_json(const PlanResult& plan,
                  const std::vector<double>& objectives) {
  json j;
  j["final_logf"] = plan.log_f;
  j["step_size_used"] = plan.step_size_used;
  j["objectives"] = objectives;
  if (!plan.trajectory.empty()) j["trajectory"] = plan.trajectory;
  return j;
}

// Evaluates one stored fluence map and writes the per-plan artifacts.
PlanEvaluation write_plan_artifacts(const fs::path& dir,
                                    const CaseDefinition& kase,
                                    const DepositionMatrix& matrix,
                                    std::span<const double> fluence) {
  const std::vector<double> d = dose(matrix, fluence);
  const PlanEvaluation evaluation = evaluate_plan(kase, d);
  write_fluence_csv(dir / "fluence.csv", kase.beams, fluence);
  write_evaluation_csv(dir / "evaluation.csv", evaluation);
  return evaluation;
}

int jobs_from_environment() {
  const char* env = std::getenv("BILEVEL_RT_THREADS");
  if (env == nullptr) return 1;
  const int value = std::atoi(env);
  return value >= 1 ? value : 1;
}

}  // namespace

GdConfig GdOverrides::resolve(const CaseDefinition& kase) const {
  GdConfig config = GdConfig::from_case_defaults(kase.optimizer_defaults);
  if (steps) config.steps = *steps;
  if (step_size) {
    if (*step_size > 0.0) {
      config.step_size = *step_size;
    } else {
      config.step_size.reset();  // back to auto scaling
    }
  }
  if (step_scale) config.step_scale = *step_scale;
  if (x_max) config.x_max = *x_max;
  if (smoothing) config.smoothing = *smoothing;
  if (record_trajectory) config.record_trajectory = *record_trajectory;
  config.validate();
  return config;
}

TunerConfig TunerOverrides::resolve(const CaseDefinition& kase) const {
  TunerConfig config;
  config.gd = gd.resolve(kase);
  if (population) config.population = *population;
  if (generations) config.generations = *generations;
  if (neighborhood) config.neighborhood = *neighborhood;
  if (seed) config.seed = *seed;
  config.jobs = jobs ? *jobs : jobs_from_environment();
  if (stagnation_eps && *stagnation_eps > 0.0) {
    config.stagnation_eps = *stagnation_eps;
  }
  config.validate();
  return config;
}

void run_phantom_stage(const fs::path& spec_path, const fs::path& out_dir) {
  StageTimer timer;
  const PhantomSpec spec = read_phantom_spec(spec_path);
  const Phantom phantom = generate_phantom(spec);
  ensure_directory(out_dir);

  write_text(out_dir / "case.json", case_to_json(phantom.kase));
  write_deposition_csv(out_dir / "deposition.csv", phantom.matrix);

  RunManifest manifest;
  manifest.stage = "phantom";
  manifest.config_json = phantom_spec_to_json(spec);
  manifest.seed = spec.seed;
  manifest.inputs["spec"] = spec_path.string();
  manifest.outputs = {"case.json", "deposition.csv"};
  manifest.total_ms = timer.elapsed_ms();
  write_manifest(out_dir, manifest);
}

LoadedCase load_case(const fs::path& case_dir) {
  LoadedCase loaded;
  loaded.dir = case_dir;
  loaded.kase = case_from_json(read_text(case_dir / "case.json"));
  loaded.kase = derive_virtual_ptvs(std::move(loaded.kase));
  loaded.matrix = read_deposition_csv(case_dir / "deposition.csv");
  if (loaded.matrix.rows() != loaded.kase.grid.voxel_count()) {
    throw config_error("deposition rows " +
                       std::to_string(loaded.matrix.rows()) +
                       " do not match the grid voxel count " +
                       std::to_string(loaded.kase.grid.voxel_count()));
  }
  if (loaded.matrix.cols() != loaded.kase.beams.beamlet_count()) {
    throw config_error("deposition columns " +
                       std::to_string(loaded.matrix.cols()) +
                       " do not match the beamlet count " +
                       std::to_string(loaded.kase.beams.beamlet_count()));
  }
  return loaded;
}

void run_optimize_stage(const LoadedCase& loaded, const fs::path& phi_path,
                        const GdOverrides& overrides,
                        const fs::path& out_dir) {
  StageTimer timer;
  CaseDefinition kase = loaded.kase;
  if (!phi_path.empty()) {
    kase = apply_phi_json(kase, read_text(phi_path));
  }
  const GdConfig config = overrides.resolve(kase);
  const PlanResult plan = optimize(kase, loaded.matrix, config);

  ensure_directory(out_dir);
  const PlanEvaluation evaluation =
      write_plan_artifacts(out_dir, kase, loaded.matrix, plan.fluence);
  write_text(out_dir / "plan.json",
             plan_to_json(plan, evaluation.objectives).dump(2) + "\n");

  RunManifest manifest;
  manifest.stage = "optimize";
  json config_json = gd_config_to_json(config);
  config_json["phi"] = phi_path.empty() ? "" : phi_path.string();
  manifest.config_json = config_json.dump();
  manifest.seed = config.init_seed;
  manifest.inputs["case_dir"] = loaded.dir.string();
  manifest.outputs = {"plan.json", "fluence.csv", "evaluation.csv"};
  manifest.total_ms = timer.elapsed_ms();
  write_manifest(out_dir, manifest);
}

void run_tune_stage(const LoadedCase& loaded, const TunerOverrides& overrides,
                    const fs::path& out_dir) {
  StageTimer timer;
  const TunerConfig config = overrides.resolve(loaded.kase);
  const TuneResult result = tune(loaded.kase, loaded.matrix, config);

  ensure_directory(out_dir);
  ensure_directory(out_dir / "plans");
  const int genotype_length =
      static_cast<int>(encode(loaded.kase).size());
  write_archive_csv(out_dir / "archive.csv", result.archive,
                    loaded.kase.objective_count(), genotype_length);
  const std::vector<ArchiveEntry>& entries = result.archive.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "plan_%05zu.csv", i);
    write_fluence_csv(out_dir / "plans" / name, loaded.kase.beams,
                      entries[i].fluence);
  }

  RunManifest manifest;
  manifest.stage = "tune";
  json config_json;
  config_json["population"] = config.population;
  config_json["generations"] = config.generations;
  config_json["neighborhood"] = config.resolved_neighborhood();
  config_json["seed"] = config.seed;
  config_json["jobs"] = config.jobs;
  config_json["sbx_eta"] = config.sbx_eta;
  config_json["sbx_prob"] = config.sbx_prob;
  config_json["mutation_eta"] = config.mutation_eta;
  config_json["mutation_prob"] = config.mutation_prob;
  if (config.stagnation_eps) {
    config_json["stagnation_eps"] = *config.stagnation_eps;
    config_json["stagnation_window"] = config.stagnation_window;
  }
  config_json["gd"] = gd_config_to_json(config.gd);
  manifest.config_json = config_json.dump();
  manifest.seed = config.seed;
  manifest.inputs["case_dir"] = loaded.dir.string();
  manifest.outputs = {"archive.csv", "plans"};
  manifest.total_ms = timer.elapsed_ms();
  write_manifest(out_dir, manifest);
}

LoadedArchive load_archive(const fs::path& archive_dir) {
  const RunManifest manifest = read_manifest(archive_dir);
  const auto it = manifest.inputs.find("case_dir");
  if (it == manifest.inputs.end()) {
    throw missing_artifact_error("archive manifest in '" +
                                 archive_dir.string() +
                                 "' does not record a case_dir");
  }
  LoadedArchive loaded;
  loaded.case_dir = it->second;

  const LoadedCase kase = load_case(loaded.case_dir);
  const fs::path csv = archive_dir / "archive.csv";
  std::ifstream in(csv);
  if (!in) {
    throw missing_artifact_error("expected file '" + csv.string() +
                                 "' is missing");
  }
  const int genotype_length = static_cast<int>(encode(kase.kase).size());
  const int objective_count = kase.kase.objective_count();

  std::string line;
  if (!std::getline(in, line)) {
    throw config_error("archive file '" + csv.string() + "' is empty");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(field);
    const std::size_t expected = 1 + static_cast<std::size_t>(genotype_length) +
                                 static_cast<std::size_t>(objective_count) + 1;
    if (fields.size() != expected) {
      throw config_error("archive row has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(expected));
    }
    ArchiveEntry entry;
    std::size_t cursor = 1;
    for (int g = 0; g < genotype_length; ++g) {
      entry.genotype.push_back(std::stod(fields[cursor++]));
    }
    for (int d = 0; d < objective_count; ++d) {
      entry.objectives.push_back(std::stod(fields[cursor++]));
    }
    entry.log_f = std::stod(fields[cursor]);

    char name[32];
    std::snprintf(name, sizeof(name), "plan_%05zu.csv",
                  loaded.archive.size());
    entry.fluence =
        read_fluence_csv(archive_dir / "plans" / name, kase.kase.beams);
    if (!loaded.archive.insert(std::move(entry))) {
      throw config_error("archive file '" + csv.string() +
                         "' contains dominated or duplicate rows");
    }
  }
  return loaded;
}

void run_reduce_stage(const fs::path& archive_dir, int k,
                      const fs::path& out_dir) {
  StageTimer timer;
  const LoadedArchive loaded = load_archive(archive_dir);
  const LoadedCase kase = load_case(loaded.case_dir);
  const int objective_count = kase.kase.objective_count();
  if (k < 0) k = objective_count + 5;  // default presentation budget

  const ReducedFront front = reduce(loaded.archive, k, objective_count);

  ensure_directory(out_dir);
  std::vector<PlanEvaluation> evaluations;
  std::vector<std::string> plan_names;
  for (std::size_t i = 0; i < front.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "plan_%zu", i);
    plan_names.push_back(name);
    const fs::path plan_dir = out_dir / name;
    ensure_directory(plan_dir);
    const ArchiveEntry& entry =
        loaded.archive.entries()[front.archive_indices[i]];
    evaluations.push_back(write_plan_artifacts(plan_dir, kase.kase,
                                               kase.matrix, entry.fluence));
  }
  write_comparison_csv(out_dir / "comparison.csv",
                       compare(evaluations, kase.kase), plan_names);

  // Selection metadata: archive row, rationale tag, objectives.
  {
    std::ofstream out(out_dir / "front.csv");
    if (!out) {
      throw config_error("cannot write '" +
                         (out_dir / "front.csv").string() + "'");
    }
    out << "plan,archive_row,tag";
    for (int d = 0; d < objective_count; ++d) out << ",f" << d;
    out << "\n";
    for (std::size_t i = 0; i < front.size(); ++i) {
      const ArchiveEntry& entry =
          loaded.archive.entries()[front.archive_indices[i]];
      out << plan_names[i] << "," << front.archive_indices[i] << ","
          << (front.tags[i] == SelectionTag::objective_minimizer
                  ? "objective_minimizer"
                  : "spread");
      for (double f : entry.objectives) out << "," << format_double(f);
      out << "\n";
    }
  }

  RunManifest manifest;
  manifest.stage = "reduce";
  json config_json;
  config_json["k"] = k;
  manifest.config_json = config_json.dump();
  manifest.inputs["archive_dir"] = archive_dir.string();
  manifest.inputs["case_dir"] = loaded.case_dir.string();
  manifest.outputs = {"front.csv", "comparison.csv"};
  manifest.total_ms = timer.elapsed_ms();
  write_manifest(out_dir, manifest);
}

void run_report_stage(const fs::path& target_dir, int z_index) {
  StageTimer timer;
  const RunManifest target_manifest = read_manifest(target_dir);
  const auto it = target_manifest.inputs.find("case_dir");
  if (it == target_manifest.inputs.end()) {
    throw missing_artifact_error("manifest in '" + target_dir.string() +
                                 "' does not record a case_dir");
  }
  const LoadedCase kase = load_case(it->second);

  std::vector<fs::path> plan_dirs;
  if (fs::exists(target_dir / "front.csv")) {
    for (std::size_t i = 0;; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "plan_%zu", i);
      const fs::path dir = target_dir / name;
      if (!fs::exists(dir)) break;
      plan_dirs.push_back(dir);
    }
    if (plan_dirs.empty()) {
      throw missing_artifact_error("front directory '" + target_dir.string() +
                                   "' contains no plan subdirectories");
    }
  } else if (fs::exists(target_dir / "fluence.csv")) {
    plan_dirs.push_back(target_dir);
  } else {
    throw missing_artifact_error("expected file '" +
                                 (target_dir / "fluence.csv").string() +
                                 "' is missing");
  }

  char slice_name[48];
  std::snprintf(slice_name, sizeof(slice_name), "slice_z%d.svg", z_index);
  std::vector<std::string> outputs;
  for (const fs::path& dir : plan_dirs) {
    const std::vector<double> fluence =
        read_fluence_csv(dir / "fluence.csv", kase.kase.beams);
    const std::vector<double> d = dose(kase.matrix, fluence);
    write_dvh_csv(dir / "dvh.csv", kase.kase, d);
    write_dvh_svg(dir / "dvh.svg", kase.kase, d);
    write_slice_svg(dir / slice_name, kase.kase, d, z_index);
    outputs.push_back((dir / "dvh.svg").string());
  }

  RunManifest manifest;
  manifest.stage = "report";
  json config_json;
  config_json["z"] = z_index;
  manifest.config_json = config_json.dump();
  manifest.inputs["target_dir"] = target_dir.string();
  manifest.inputs["case_dir"] = it->second;
  manifest.outputs = outputs;
  manifest.total_ms = timer.elapsed_ms();
  write_manifest(target_dir, manifest, "report_manifest.json");
}

}  // namespace brt::io
