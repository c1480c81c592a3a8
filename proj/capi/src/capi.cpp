//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "bilevelrt.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "brt/decision.hpp"
#include "brt/errors.hpp"
#include "brt/io.hpp"
#include "brt/optimizer.hpp"
#include "brt/tuner.hpp"

namespace {

thread_local std::string g_last_error;

void clear_error() { g_last_error.clear(); }

brt_status fail(brt_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Translates core exceptions into status codes.
template <typename Fn>
brt_status guarded(Fn&& fn) {
  clear_error();
  try {
    fn();
    return BRT_OK;
  } catch (const brt::config_error& e) {
    return fail(BRT_ERR_CONFIG, e.what());
  } catch (const brt::numeric_error& e) {
    return fail(BRT_ERR_NUMERIC, e.what());
  } catch (const brt::missing_artifact_error& e) {
    return fail(BRT_ERR_MISSING_ARTIFACT, e.what());
  } catch (const std::exception& e) {
    return fail(BRT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BRT_ERR_INTERNAL, "unknown error");
  }
}

brt::io::GdOverrides to_overrides(const brt_gd_options* options) {
  brt::io::GdOverrides overrides;
  if (options == nullptr) return overrides;
  if (options->steps >= 0) overrides.steps = options->steps;
  if (options->step_size >= 0.0) overrides.step_size = options->step_size;
  if (options->step_scale > 0.0) overrides.step_scale = options->step_scale;
  if (options->x_max > 0.0) overrides.x_max = options->x_max;
  if (options->smoothing >= 0) overrides.smoothing = options->smoothing != 0;
  if (options->record_trajectory > 0) overrides.record_trajectory = true;
  return overrides;
}

brt::io::TunerOverrides to_overrides(const brt_tuner_options* options) {
  brt::io::TunerOverrides overrides;
  if (options == nullptr) return overrides;
  if (options->population >= 0) overrides.population = options->population;
  if (options->generations >= 0) overrides.generations = options->generations;
  if (options->neighborhood > 0) {
    overrides.neighborhood = options->neighborhood;
  }
  if (options->seed >= 0) {
    overrides.seed = static_cast<std::uint64_t>(options->seed);
  }
  if (options->jobs > 0) overrides.jobs = options->jobs;
  if (options->stagnation_eps > 0.0) {
    overrides.stagnation_eps = options->stagnation_eps;
  }
  overrides.gd = to_overrides(&options->gd);
  return overrides;
}

}  // namespace

// Handle bodies wrap the core value types; brt_plan and brt_archive keep the
// case they were produced from so save/reduce need no extra arguments.
struct brt_case {
  brt::io::LoadedCase loaded;
};

struct brt_plan {
  brt::CaseDefinition kase;  // with the applied parameter assignment
  std::filesystem::path case_dir;
  brt::PlanResult result;
  std::vector<double> objectives;
  brt::GdConfig config;
  std::string phi_path;
};

struct brt_archive {
  brt::ParetoArchive archive;
  std::filesystem::path case_dir;
  int objective_count = 0;
};

struct brt_front {
  brt::ReducedFront front;
};

extern "C" {

const char* brt_version(void) { return brt::io::kVersion; }

const char* brt_last_error(void) { return g_last_error.c_str(); }

void brt_gd_options_init(brt_gd_options* options) {
  if (options == nullptr) return;
  options->steps = -1;
  options->step_size = -1.0;
  options->step_scale = -1.0;
  options->x_max = -1.0;
  options->smoothing = -1;
  options->record_trajectory = 0;
}

void brt_tuner_options_init(brt_tuner_options* options) {
  if (options == nullptr) return;
  options->population = -1;
  options->generations = -1;
  options->neighborhood = 0;
  options->seed = -1;
  options->jobs = 0;
  options->stagnation_eps = 0.0;
  brt_gd_options_init(&options->gd);
}

brt_status brt_phantom_generate(const char* spec_json_path,
                                const char* out_dir) {
  return guarded([&] {
    brt::io::run_phantom_stage(spec_json_path, out_dir);
  });
}

brt_status brt_optimize_dir(const char* case_dir, const char* phi_json_path,
                            const brt_gd_options* options,
                            const char* out_dir) {
  return guarded([&] {
    const brt::io::LoadedCase loaded = brt::io::load_case(case_dir);
    brt::io::run_optimize_stage(
        loaded, phi_json_path == nullptr ? "" : phi_json_path,
        to_overrides(options), out_dir);
  });
}

brt_status brt_tune_dir(const char* case_dir,
                        const brt_tuner_options* options,
                        const char* out_dir) {
  return guarded([&] {
    const brt::io::LoadedCase loaded = brt::io::load_case(case_dir);
    brt::io::run_tune_stage(loaded, to_overrides(options), out_dir);
  });
}

brt_status brt_reduce_dir(const char* archive_dir, int32_t k,
                          const char* out_dir) {
  return guarded([&] {
    brt::io::run_reduce_stage(archive_dir, k, out_dir);
  });
}

brt_status brt_report_dir(const char* plan_or_front_dir, int32_t z_index) {
  return guarded([&] {
    brt::io::run_report_stage(plan_or_front_dir, z_index);
  });
}

brt_status brt_case_open(const char* case_dir, brt_case** out_case) {
  if (out_case == nullptr) {
    return fail(BRT_ERR_CONFIG, "out_case must not be null");
  }
  *out_case = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<brt_case>();
    handle->loaded = brt::io::load_case(case_dir);
    *out_case = handle.release();
  });
}

void brt_case_close(brt_case* kase) { delete kase; }

int32_t brt_case_voxel_count(const brt_case* kase) {
  return kase == nullptr ? -1 : kase->loaded.kase.grid.voxel_count();
}

int32_t brt_case_beamlet_count(const brt_case* kase) {
  return kase == nullptr ? -1 : kase->loaded.kase.beams.beamlet_count();
}

int32_t brt_case_structure_count(const brt_case* kase) {
  return kase == nullptr
             ? -1
             : static_cast<int32_t>(kase->loaded.kase.structures.size());
}

const char* brt_case_structure_id(const brt_case* kase, int32_t index) {
  if (kase == nullptr || index < 0 ||
      index >= static_cast<int32_t>(kase->loaded.kase.structures.size())) {
    return nullptr;
  }
  return kase->loaded.kase.structures[index].id.c_str();
}

int32_t brt_case_objective_count(const brt_case* kase) {
  return kase == nullptr ? -1 : kase->loaded.kase.objective_count();
}

brt_status brt_optimize_run(const brt_case* kase, const char* phi_json_path,
                            const brt_gd_options* options,
                            brt_plan** out_plan) {
  if (kase == nullptr || out_plan == nullptr) {
    return fail(BRT_ERR_CONFIG, "case and out_plan must not be null");
  }
  *out_plan = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<brt_plan>();
    handle->kase = kase->loaded.kase;
    handle->case_dir = kase->loaded.dir;
    if (phi_json_path != nullptr && phi_json_path[0] != '\0') {
      std::ifstream in(phi_json_path);
      if (!in) {
        throw brt::missing_artifact_error(
            std::string("cannot open '") + phi_json_path + "'");
      }
      std::ostringstream buffer;
      buffer << in.rdbuf();
      handle->kase = brt::io::apply_phi_json(handle->kase, buffer.str());
      handle->phi_path = phi_json_path;
    }
    handle->config = to_overrides(options).resolve(handle->kase);
    handle->result =
        brt::optimize(handle->kase, kase->loaded.matrix, handle->config);
    const std::vector<double> d =
        brt::dose(kase->loaded.matrix, handle->result.fluence);
    handle->objectives = brt::objective_vector(d, handle->kase);
    *out_plan = handle.release();
  });
}

void brt_plan_close(brt_plan* plan) { delete plan; }

double brt_plan_log_objective(const brt_plan* plan) {
  return plan == nullptr ? 0.0 : plan->result.log_f;
}

int32_t brt_plan_fluence_size(const brt_plan* plan) {
  return plan == nullptr
             ? -1
             : static_cast<int32_t>(plan->result.fluence.size());
}

brt_status brt_plan_fluence(const brt_plan* plan, double* buffer,
                            int32_t length) {
  if (plan == nullptr || buffer == nullptr) {
    return fail(BRT_ERR_CONFIG, "plan and buffer must not be null");
  }
  if (length < static_cast<int32_t>(plan->result.fluence.size())) {
    return fail(BRT_ERR_CONFIG, "fluence buffer too small");
  }
  clear_error();
  std::memcpy(buffer, plan->result.fluence.data(),
              plan->result.fluence.size() * sizeof(double));
  return BRT_OK;
}

int32_t brt_plan_objective_count(const brt_plan* plan) {
  return plan == nullptr ? -1
                         : static_cast<int32_t>(plan->objectives.size());
}

brt_status brt_plan_objectives(const brt_plan* plan, double* buffer,
                               int32_t length) {
  if (plan == nullptr || buffer == nullptr) {
    return fail(BRT_ERR_CONFIG, "plan and buffer must not be null");
  }
  if (length < static_cast<int32_t>(plan->objectives.size())) {
    return fail(BRT_ERR_CONFIG, "objective buffer too small");
  }
  clear_error();
  std::memcpy(buffer, plan->objectives.data(),
              plan->objectives.size() * sizeof(double));
  return BRT_OK;
}

brt_status brt_plan_save(const brt_plan* plan, const char* out_dir) {
  if (plan == nullptr) return fail(BRT_ERR_CONFIG, "plan must not be null");
  return guarded([&] {
    brt::io::LoadedCase loaded = brt::io::load_case(plan->case_dir);
    brt::io::GdOverrides overrides;
    overrides.steps = plan->config.steps;
    overrides.step_size = plan->config.step_size.value_or(0.0);
    overrides.step_scale = plan->config.step_scale;
    overrides.x_max = plan->config.x_max;
    overrides.smoothing = plan->config.smoothing;
    overrides.record_trajectory = plan->config.record_trajectory;
    brt::io::run_optimize_stage(loaded, plan->phi_path, overrides, out_dir);
  });
}

brt_status brt_tune_run(const brt_case* kase,
                        const brt_tuner_options* options,
                        brt_archive** out_archive) {
  if (kase == nullptr || out_archive == nullptr) {
    return fail(BRT_ERR_CONFIG, "case and out_archive must not be null");
  }
  *out_archive = nullptr;
  return guarded([&] {
    const brt::TunerConfig config =
        to_overrides(options).resolve(kase->loaded.kase);
    brt::TuneResult result =
        brt::tune(kase->loaded.kase, kase->loaded.matrix, config);
    auto handle = std::make_unique<brt_archive>();
    handle->archive = std::move(result.archive);
    handle->case_dir = kase->loaded.dir;
    handle->objective_count = kase->loaded.kase.objective_count();
    *out_archive = handle.release();
  });
}

brt_status brt_archive_open(const char* archive_dir,
                            brt_archive** out_archive) {
  if (out_archive == nullptr) {
    return fail(BRT_ERR_CONFIG, "out_archive must not be null");
  }
  *out_archive = nullptr;
  return guarded([&] {
    brt::io::LoadedArchive loaded = brt::io::load_archive(archive_dir);
    const brt::io::LoadedCase kase = brt::io::load_case(loaded.case_dir);
    auto handle = std::make_unique<brt_archive>();
    handle->archive = std::move(loaded.archive);
    handle->case_dir = loaded.case_dir;
    handle->objective_count = kase.kase.objective_count();
    *out_archive = handle.release();
  });
}

void brt_archive_close(brt_archive* archive) { delete archive; }

int32_t brt_archive_size(const brt_archive* archive) {
  return archive == nullptr ? -1
                            : static_cast<int32_t>(archive->archive.size());
}

brt_status brt_archive_objectives(const brt_archive* archive, int32_t index,
                                  double* buffer, int32_t length) {
  if (archive == nullptr || buffer == nullptr) {
    return fail(BRT_ERR_CONFIG, "archive and buffer must not be null");
  }
  if (index < 0 || index >= static_cast<int32_t>(archive->archive.size())) {
    return fail(BRT_ERR_CONFIG, "archive index out of range");
  }
  const std::vector<double>& objectives =
      archive->archive.entries()[index].objectives;
  if (length < static_cast<int32_t>(objectives.size())) {
    return fail(BRT_ERR_CONFIG, "objective buffer too small");
  }
  clear_error();
  std::memcpy(buffer, objectives.data(),
              objectives.size() * sizeof(double));
  return BRT_OK;
}

brt_status brt_reduce_run(const brt_archive* archive, int32_t k,
                          brt_front** out_front) {
  if (archive == nullptr || out_front == nullptr) {
    return fail(BRT_ERR_CONFIG, "archive and out_front must not be null");
  }
  *out_front = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<brt_front>();
    handle->front =
        brt::reduce(archive->archive, k, archive->objective_count);
    *out_front = handle.release();
  });
}

void brt_front_close(brt_front* front) { delete front; }

int32_t brt_front_size(const brt_front* front) {
  return front == nullptr ? -1 : static_cast<int32_t>(front->front.size());
}

int32_t brt_front_archive_index(const brt_front* front, int32_t position) {
  if (front == nullptr || position < 0 ||
      position >= static_cast<int32_t>(front->front.size())) {
    return -1;
  }
  return front->front.archive_indices[position];
}

}  // extern "C"
