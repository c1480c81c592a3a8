//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <cmath>

#include <doctest.h>

#include "brt/errors.hpp"
#include "brt/phantom.hpp"
#include "fixtures.hpp"

using brt::PhantomSpec;

TEST_CASE("pencil kernel values at the defining points") {
  CHECK(brt::pencil_beam_weight(0.0, 0.0, 0.05, 3.0) == 1.0);
  CHECK(brt::pencil_beam_weight(10.0, 0.0, 0.05, 3.0) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // Zero sigma collapses the profile onto the axis.
  CHECK(brt::pencil_beam_weight(0.0, 0.5, 0.0, 3.0) <
        brt::pencil_beam_weight(0.0, 0.0, 0.0, 3.0));
  CHECK(brt::pencil_beam_weight(5.0, 1.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("generation is bitwise deterministic per seed") {
  const PhantomSpec spec = brt::default_desk_spec();
  const brt::Phantom a = brt::generate_phantom(spec);
  const brt::Phantom b = brt::generate_phantom(spec);
  const auto ta = a.matrix.to_triplets();
  const auto tb = b.matrix.to_triplets();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].row == tb[i].row);
    CHECK(ta[i].col == tb[i].col);
    CHECK(ta[i].value == tb[i].value);  // bitwise
  }

  PhantomSpec reseeded = spec;
  reseeded.seed = spec.seed + 1;
  const brt::Phantom c = brt::generate_phantom(reseeded);
  CHECK(c.matrix.to_triplets() != ta);
}

TEST_CASE("deposition entries respect the cutoff and positivity") {
  const brt::Phantom phantom = brt::generate_phantom(brt::default_desk_spec());
  const PhantomSpec spec = brt::default_desk_spec();
  for (const brt::Triplet& t : phantom.matrix.to_triplets()) {
    CHECK(t.value >= spec.cutoff);
    CHECK(std::isfinite(t.value));
  }
  CHECK(phantom.matrix.max_column_abs_sum() > 0.0);
  CHECK(std::isfinite(phantom.matrix.max_column_abs_sum()));
}

TEST_CASE("every PTV voxel is reachable") {
  const brt::Phantom phantom = brt::generate_phantom(brt::default_desk_spec());
  for (const brt::Structure& s : phantom.kase.structures) {
    if (s.kind != brt::StructureKind::ptv) continue;
    for (int v : s.voxels) CHECK_FALSE(phantom.matrix.row_empty(v));
  }
}

TEST_CASE("normal tissue fills exactly the unclaimed voxels") {
  const brt::Phantom phantom = brt::generate_phantom(brt::default_desk_spec());
  const int tissue = phantom.kase.structure_index("normal_tissue");
  REQUIRE(tissue >= 0);
  std::size_t total = 0;
  for (const brt::Structure& s : phantom.kase.structures) {
    total += s.voxels.size();
  }
  CHECK(static_cast<int>(total) == phantom.kase.grid.voxel_count());
}

TEST_CASE("invalid specs are rejected with the offending structure") {
  PhantomSpec spec = fixtures::single_gland_spec();
  spec.structures[0].shape.center = {39.0, 20.0, 0.5};  // pokes outside
  try {
    brt::generate_phantom(spec);
    FAIL("expected config_error");
  } catch (const brt::config_error& e) {
    CHECK(std::string(e.what()).find("ptv") != std::string::npos);
  }

  spec = fixtures::single_gland_spec();
  spec.beam_count = 0;
  CHECK_THROWS_AS(brt::generate_phantom(spec), brt::config_error);

  spec = fixtures::single_gland_spec();
  spec.structures[1].shape.half_size = {0.05, 0.05, 0.05};  // misses centers
  CHECK_THROWS_AS(brt::generate_phantom(spec), brt::config_error);
}

TEST_CASE("desk defaults produce the documented layout") {
  const brt::Phantom phantom = brt::generate_phantom(brt::default_desk_spec());
  CHECK(phantom.kase.grid.voxel_count() == 1600);
  CHECK(phantom.kase.beams.beamlet_count() == 81);
  CHECK(phantom.kase.priorities.size() == 1);
  CHECK(phantom.kase.objective_count() == 2);
  CHECK(phantom.kase.optimizer_defaults.x_max > 0.0);
  CHECK_NOTHROW(phantom.kase.validate());
}
