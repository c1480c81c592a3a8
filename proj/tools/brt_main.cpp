//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the bilevel fluence-map optimization pipeline:
// phantom -> optimize/tune -> reduce -> report. Talks to the engine
// exclusively through the C API.
//
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bilevelrt.h"

namespace {

int report_status(brt_status status) {
  if (status != BRT_OK) {
    std::fprintf(stderr, "error: %s\n", brt_last_error());
  }
  return static_cast<int>(status);
}

struct GdFlags {
  int steps = -1;
  double step_size = -1.0;
  double step_scale = -1.0;
  double x_max = -1.0;
  bool no_smoothing = false;
  bool trajectory = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--steps", steps, "Inner gradient steps");
    cmd->add_option("--step-size", step_size,
                    "Explicit step size (0 selects the auto step)");
    cmd->add_option("--step-scale", step_scale,
                    "Scale of the auto step c/||D||_1");
    cmd->add_option("--x-max", x_max, "Beamlet intensity cap");
    cmd->add_flag("--no-smoothing", no_smoothing,
                  "Disable the 3x3 fluence smoothing");
    cmd->add_flag("--trajectory", trajectory,
                  "Record per-step objective samples");
  }

  brt_gd_options resolve() const {
    brt_gd_options options;
    brt_gd_options_init(&options);
    options.steps = steps;
    options.step_size = step_size;
    options.step_scale = step_scale;
    options.x_max = x_max;
    if (no_smoothing) options.smoothing = 0;
    options.record_trajectory = trajectory ? 1 : 0;
    return options;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilevel gEUD-based fluence-map optimization pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", brt_version());

  // phantom
  std::string spec_path, phantom_out;
  CLI::App* phantom = app.add_subcommand(
      "phantom", "Generate a synthetic case from a phantom spec");
  phantom->add_option("spec", spec_path, "Phantom spec JSON")->required();
  phantom->add_option("out_dir", phantom_out, "Output case directory")
      ->required();

  // optimize
  std::string opt_case, opt_out, phi_path;
  GdFlags opt_gd;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "Run one inner optimization for a fixed parameter set");
  optimize->add_option("case_dir", opt_case, "Case directory")->required();
  optimize->add_option("out_dir", opt_out, "Output plan directory")
      ->required();
  optimize->add_option("--phi", phi_path,
                       "JSON assignment of tunable gEUD parameters");
  opt_gd.attach(optimize);

  // tune
  std::string tune_case, tune_out;
  GdFlags tune_gd;
  int population = -1, generations = -1, neighborhood = 0, jobs = 0;
  long long seed = -1;
  double stagnation_eps = 0.0;
  CLI::App* tune = app.add_subcommand(
      "tune", "Search the gEUD parameter space with the evolutionary tuner");
  tune->add_option("case_dir", tune_case, "Case directory")->required();
  tune->add_option("out_dir", tune_out, "Output archive directory")
      ->required();
  tune->add_option("--pop", population, "Population size");
  tune->add_option("--gens", generations, "Generation count");
  tune->add_option("--neighborhood", neighborhood,
                   "Mating neighborhood size (0 = auto)");
  tune->add_option("--seed", seed, "RNG seed");
  tune->add_option("--jobs", jobs,
                   "Parallel evaluation width (default: BILEVEL_RT_THREADS)");
  tune->add_option("--stagnation-eps", stagnation_eps,
                   "Optional early stop on archive hypervolume stagnation");
  tune_gd.attach(tune);

  // reduce
  std::string reduce_archive, reduce_out;
  int k = -1;
  CLI::App* reduce = app.add_subcommand(
      "reduce", "Reduce an archive to a small well-spread plan set");
  reduce->add_option("archive_dir", reduce_archive, "Archive directory")
      ->required();
  reduce->add_option("out_dir", reduce_out, "Output front directory")
      ->required();
  reduce->add_option("--k", k, "Number of plans to keep (default |P|+6)");

  // report
  std::string report_dir;
  int z = 0;
  CLI::App* report = app.add_subcommand(
      "report", "Render DVH and dose-slice charts for a plan or front");
  report->add_option("dir", report_dir, "Plan or front directory")
      ->required();
  report->add_option("--z", z, "Axial slice index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; anything else is a usage error.
    return code == 0 ? 0 : 2;
  }

  if (phantom->parsed()) {
    return report_status(
        brt_phantom_generate(spec_path.c_str(), phantom_out.c_str()));
  }
  if (optimize->parsed()) {
    const brt_gd_options options = opt_gd.resolve();
    return report_status(brt_optimize_dir(
        opt_case.c_str(), phi_path.empty() ? nullptr : phi_path.c_str(),
        &options, opt_out.c_str()));
  }
  if (tune->parsed()) {
    brt_tuner_options options;
    brt_tuner_options_init(&options);
    options.population = population;
    options.generations = generations;
    options.neighborhood = neighborhood;
    options.seed = seed;
    options.jobs = jobs;
    options.stagnation_eps = stagnation_eps;
    options.gd = tune_gd.resolve();
    return report_status(
        brt_tune_dir(tune_case.c_str(), &options, tune_out.c_str()));
  }
  if (reduce->parsed()) {
    return report_status(
        brt_reduce_dir(reduce_archive.c_str(), k, reduce_out.c_str()));
  }
  if (report->parsed()) {
    return report_status(brt_report_dir(report_dir.c_str(), z));
  }
  return 2;
}
