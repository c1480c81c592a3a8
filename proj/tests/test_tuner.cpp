//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "brt/errors.hpp"
#include "brt/phantom.hpp"
#include "brt/tuner.hpp"
#include "fixtures.hpp"

using brt::ArchiveEntry;
using brt::ParetoArchive;

namespace {

// O(n^2) pairwise nondominance oracle.
bool mutually_nondominated(const std::vector<ArchiveEntry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = 0; j < entries.size(); ++j) {
      if (i == j) continue;
      if (brt::dominates(entries[i].objectives, entries[j].objectives)) {
        return false;
      }
    }
  }
  return true;
}

brt::TunerConfig small_config(const brt::CaseDefinition& kase, int pop,
                              int gens, int steps) {
  brt::TunerConfig config;
  config.population = pop;
  config.generations = gens;
  config.seed = 1234;
  config.gd = brt::GdConfig::from_case_defaults(kase.optimizer_defaults);
  config.gd.steps = steps;
  return config;
}

}  // namespace

TEST_CASE("encode lists the tunable scalars in case order") {
  const brt::CaseDefinition kase =
      brt::derive_virtual_ptvs(fixtures::head_neck_case());
  const std::vector<brt::GenePosition> genes = brt::encode(kase);
  // Two glands contribute all three scalars, three PTVs two each.
  CHECK(genes.size() == 12);
  CHECK(genes[0].label(kase) == "gland_right.eud0");
  CHECK(genes[3].label(kase) == "gland_left.eud0");
  CHECK(genes[6].label(kase) == "ptv54.a");
  CHECK(genes[11].label(kase) == "ptv66.n");
}

TEST_CASE("decode round-trips midpoints and refreshes virtual linkage") {
  const brt::CaseDefinition kase =
      brt::derive_virtual_ptvs(fixtures::head_neck_case());
  const std::vector<brt::GenePosition> genes = brt::encode(kase);
  std::vector<double> genotype;
  for (const brt::GenePosition& g : genes) genotype.push_back(g.range.mid());
  const brt::CaseDefinition decoded = brt::decode(genotype, kase);

  for (std::size_t i = 0; i < genes.size(); ++i) {
    const brt::StructureParams& p =
        decoded.structures[genes[i].structure].params;
    const double v = genes[i].field == brt::GenePosition::Field::eud0
                         ? p.eud0
                         : (genes[i].field == brt::GenePosition::Field::a
                                ? p.a
                                : p.n);
    CHECK(v == genotype[i]);
  }

  // Every virtual PTV mirrors its mutated parent exactly.
  for (const brt::Structure& s : decoded.structures) {
    if (s.kind != brt::StructureKind::virtual_ptv) continue;
    const brt::Structure& parent = decoded.structures[s.parent];
    CHECK(s.params.eud0 == parent.params.eud0 + 1.0);
    CHECK(s.params.a == -parent.params.a);
    CHECK(s.params.n == parent.params.n);
  }
}

TEST_CASE("decode rejects bad genotypes") {
  const brt::CaseDefinition kase =
      brt::derive_virtual_ptvs(fixtures::head_neck_case());
  CHECK_THROWS_AS(brt::decode(std::vector<double>(3, 1.0), kase),
                  brt::config_error);

  std::vector<double> genotype;
  for (const brt::GenePosition& g : brt::encode(kase)) {
    genotype.push_back(g.range.mid());
  }
  genotype[0] = 1e9;
  try {
    brt::decode(genotype, kase);
    FAIL("expected config_error");
  } catch (const brt::config_error& e) {
    CHECK(std::string(e.what()).find("gland_right.eud0") !=
          std::string::npos);
  }
}

TEST_CASE("zero tunable scalars encode to an empty genotype") {
  brt::CaseDefinition kase = brt::derive_virtual_ptvs(fixtures::head_neck_case());
  for (brt::Structure& s : kase.structures) {
    s.params.eud0_tunable = false;
    s.params.a_tunable = false;
    s.params.n_tunable = false;
  }
  CHECK(brt::encode(kase).empty());
  const brt::CaseDefinition decoded = brt::decode({}, kase);
  CHECK(decoded.structures.size() == kase.structures.size());
}

TEST_CASE("archive stays mutually nondominated under random inserts") {
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  ParetoArchive archive;
  for (int i = 0; i < 500; ++i) {
    ArchiveEntry entry;
    entry.objectives = {value(engine), value(engine)};
    archive.insert(std::move(entry));
    REQUIRE(mutually_nondominated(archive.entries()));
  }
  CHECK_FALSE(archive.empty());
}

TEST_CASE("archive rejects sentinels and exact duplicates") {
  ParetoArchive archive;
  ArchiveEntry infeasible;
  infeasible.objectives = {std::numeric_limits<double>::infinity(), 1.0};
  CHECK_FALSE(archive.insert(std::move(infeasible)));
  CHECK(archive.empty());

  ArchiveEntry a;
  a.objectives = {1.0, 2.0};
  CHECK(archive.insert(std::move(a)));
  ArchiveEntry duplicate;
  duplicate.objectives = {1.0, 2.0};
  CHECK_FALSE(archive.insert(std::move(duplicate)));
  CHECK(archive.size() == 1);
}

TEST_CASE("uniform weights cover the simplex") {
  const auto two = brt::uniform_weights(2, 5);
  REQUIRE(two.size() == 5);
  CHECK(two.front()[0] == 0.0);
  CHECK(two.back()[0] == 1.0);
  for (const auto& w : two) {
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto three = brt::uniform_weights(3, 28);
  REQUIRE(three.size() == 28);
  for (const auto& w : three) {
    CHECK(w.size() == 3);
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto subsampled = brt::uniform_weights(3, 20);
  CHECK(subsampled.size() == 20);
}

TEST_CASE("hypervolume of known fronts") {
  CHECK(brt::hypervolume({{0.0, 0.0}}, {1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(brt::hypervolume({{0.5, 0.0}, {0.0, 0.5}}, {1.0, 1.0}) ==
        doctest::Approx(0.75));
  CHECK(brt::hypervolume({{0.0, 0.0, 0.0}}, {1.0, 1.0, 1.0}) ==
        doctest::Approx(1.0));
  CHECK(brt::hypervolume({{0.5, 0.5, 0.5}, {0.0, 0.0, 0.5}},
                         {1.0, 1.0, 1.0}) == doctest::Approx(0.625));
  // Dominated points contribute nothing.
  CHECK(brt::hypervolume({{0.0, 0.0}, {0.5, 0.5}}, {1.0, 1.0}) ==
        doctest::Approx(1.0));
}

TEST_CASE("a case without tunables collapses to the default plan") {
  brt::PhantomSpec spec = fixtures::single_gland_spec();
  for (brt::PhantomStructureSpec& s : spec.structures) {
    s.params.eud0_tunable = false;
    s.params.a_tunable = false;
    s.params.n_tunable = false;
  }
  spec.gd_steps = 60;
  const brt::Phantom phantom = brt::generate_phantom(spec);
  const brt::CaseDefinition kase = brt::derive_virtual_ptvs(phantom.kase);

  brt::TunerConfig config = small_config(kase, 2, 1, 60);
  const brt::TuneResult result = brt::tune(kase, phantom.matrix, config);
  CHECK(result.archive.size() == 1);
  CHECK(result.inner_runs == 1);  // every individual hits the cache
}

TEST_CASE("small tuner runs are reproducible and keep archive invariants") {
  const brt::Phantom phantom =
      brt::generate_phantom(fixtures::single_gland_spec());
  const brt::CaseDefinition kase = brt::derive_virtual_ptvs(phantom.kase);

  brt::TunerConfig config = small_config(kase, 6, 3, 60);
  std::vector<std::size_t> archive_sizes;
  std::vector<std::vector<double>> best_per_objective;
  brt::GenerationObserver observer = [&](int, const ParetoArchive& archive) {
    REQUIRE(mutually_nondominated(archive.entries()));
    std::vector<double> best(2, std::numeric_limits<double>::infinity());
    for (const ArchiveEntry& e : archive.entries()) {
      best[0] = std::min(best[0], e.objectives[0]);
      best[1] = std::min(best[1], e.objectives[1]);
    }
    best_per_objective.push_back(best);
    archive_sizes.push_back(archive.size());
  };
  const brt::TuneResult first = brt::tune(kase, phantom.matrix, config, observer);
  CHECK(first.generations_run == 3);
  REQUIRE(best_per_objective.size() == 3);
  for (std::size_t g = 1; g < best_per_objective.size(); ++g) {
    CHECK(best_per_objective[g][0] <= best_per_objective[g - 1][0]);
    CHECK(best_per_objective[g][1] <= best_per_objective[g - 1][1]);
  }

  const brt::TuneResult second = brt::tune(kase, phantom.matrix, config);
  REQUIRE(second.archive.size() == first.archive.size());
  for (std::size_t i = 0; i < first.archive.size(); ++i) {
    CHECK(first.archive.entries()[i].objectives ==
          second.archive.entries()[i].objectives);
    CHECK(first.archive.entries()[i].genotype ==
          second.archive.entries()[i].genotype);
    CHECK(first.archive.entries()[i].fluence ==
          second.archive.entries()[i].fluence);
  }

  // Parallel evaluation must not change results.
  brt::TunerConfig parallel = config;
  parallel.jobs = 4;
  const brt::TuneResult third = brt::tune(kase, phantom.matrix, parallel);
  REQUIRE(third.archive.size() == first.archive.size());
  for (std::size_t i = 0; i < first.archive.size(); ++i) {
    CHECK(first.archive.entries()[i].objectives ==
          third.archive.entries()[i].objectives);
  }

  // Genotypes stay inside their boxes.
  const std::vector<brt::GenePosition> genes = brt::encode(kase);
  for (const ArchiveEntry& e : first.archive.entries()) {
    REQUIRE(e.genotype.size() == genes.size());
    for (std::size_t i = 0; i < genes.size(); ++i) {
      CHECK(e.genotype[i] >= genes[i].range.lo);
      CHECK(e.genotype[i] <= genes[i].range.hi);
    }
  }
}

TEST_CASE("aborted inner runs mark individuals infeasible, never archived") {
  brt::PhantomSpec spec = fixtures::single_gland_spec();
  spec.gd_steps = 10;
  const brt::Phantom phantom = brt::generate_phantom(spec);
  brt::CaseDefinition kase = brt::derive_virtual_ptvs(phantom.kase);
  // Poison a fixed structure so every inner run aborts.
  kase.structures[kase.structure_index("normal_tissue")].params.n = 1e308;

  brt::TunerConfig config = small_config(kase, 4, 1, 10);
  config.gd.step_size = 1e-3;
  const brt::TuneResult result = brt::tune(kase, phantom.matrix, config);
  CHECK(result.archive.empty());
}

TEST_CASE("tuner config validation") {
  const brt::CaseDefinition kase =
      brt::derive_virtual_ptvs(fixtures::head_neck_case());
  brt::TunerConfig config;
  config.gd.steps = 1;
  config.population = 1;
  CHECK_THROWS_AS(config.validate(), brt::config_error);
  config.population = 150;
  CHECK(config.resolved_neighborhood() == 20);  // 0.13 ratio at the default
  config.population = 20;
  CHECK(config.resolved_neighborhood() == 3);
  config.neighborhood = 25;
  CHECK_THROWS_AS(config.validate(), brt::config_error);
}
