//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the installed command-line binary (path in BRT_CLI, set by
// ctest) for exit-code contracts and stage wiring.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "brt/io.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("BRT_CLI");
  REQUIRE_MESSAGE(env != nullptr,
                  "BRT_CLI must point at the command-line binary");
  return env;
}

int run_cli(const std::string& args) {
  const std::string command = cli_path() + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(command.c_str());
  return WEXITSTATUS(raw);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("brt_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_small_spec(const fs::path& dir) {
  brt::PhantomSpec spec = fixtures::single_gland_spec();
  spec.gd_steps = 40;
  const fs::path path = dir / "spec.json";
  std::ofstream(path) << brt::io::phantom_spec_to_json(spec);
  return path;
}

}  // namespace

TEST_CASE("version flag exits cleanly") {
  CHECK(run_cli("--version") == 0);
}

TEST_CASE("usage errors exit with the config code") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("exit codes: config, numeric-free run, missing artifacts") {
  TempDir dir("codes");
  const fs::path bad = dir.path / "bad.json";
  std::ofstream(bad) << "{ nope";
  CHECK(run_cli("phantom " + bad.string() + " " +
                (dir.path / "case").string()) == 2);

  CHECK(run_cli("optimize " + (dir.path / "nowhere").string() + " " +
                (dir.path / "plan").string()) == 4);
  CHECK(run_cli("report " + (dir.path / "nowhere").string()) == 4);

  const fs::path spec = write_small_spec(dir.path);
  const fs::path case_dir = dir.path / "case";
  CHECK(run_cli("phantom " + spec.string() + " " + case_dir.string()) == 0);

  // steps must be at least one
  CHECK(run_cli("optimize " + case_dir.string() + " " +
                (dir.path / "plan").string() + " --steps 0") == 2);
}

TEST_CASE("full pipeline runs and is idempotent per stage") {
  TempDir dir("pipeline");
  const fs::path spec = write_small_spec(dir.path);
  const fs::path case_dir = dir.path / "case";
  REQUIRE(run_cli("phantom " + spec.string() + " " + case_dir.string()) == 0);

  const std::string tune_flags = " --pop 4 --gens 1 --seed 9 --steps 30";
  const fs::path archive = dir.path / "archive";
  REQUIRE(run_cli("tune " + case_dir.string() + " " + archive.string() +
                  tune_flags) == 0);

  const fs::path front = dir.path / "front";
  REQUIRE(run_cli("reduce " + archive.string() + " " + front.string() +
                  " --k 3") == 0);
  REQUIRE(run_cli("report " + front.string() + " --z 0") == 0);
  CHECK(fs::exists(front / "plan_0" / "dvh.svg"));
  CHECK(fs::exists(front / "comparison.csv"));

  // reduce with k below the objective count
  CHECK(run_cli("reduce " + archive.string() + " " +
                (dir.path / "front2").string() + " --k 1") == 2);

  // Re-running the tune stage with identical inputs rewrites identical data
  // files.
  auto read_file = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  const std::string before = read_file(archive / "archive.csv");
  REQUIRE(run_cli("tune " + case_dir.string() + " " + archive.string() +
                  tune_flags) == 0);
  CHECK(read_file(archive / "archive.csv") == before);
}
